#include "cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "octree/dataset.hpp"
#include "octree/error.hpp"
#include "octree/eval.hpp"
#include "octree/format.hpp"
#include "octree/model_io.hpp"
#include "octree/tree.hpp"

namespace octree::cli {

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("cannot parse \"" + item + "\" in " + what);
    }
  }
  return out;
}

// "default" or "alpha=0.5,0.6;nu=0.05,0.1" (keys alpha, nu, gamma, beta; the
// first key varies slowest). Unlisted fields come from `base`.
std::vector<Hyperparams> parse_grid(const std::string& text, const Hyperparams& base) {
  if (text == "default") {
    auto grid = eval::default_grid();
    for (auto& p : grid) {
      p.grid_points = base.grid_points;
    }
    return grid;
  }
  std::vector<Hyperparams> grid{base};
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw Error("grid entry \"" + part + "\" lacks '='");
    const std::string key = part.substr(0, eq);
    const auto values = parse_list(part.substr(eq + 1), "grid entry " + key);
    if (values.empty()) throw Error("grid entry \"" + key + "\" has no values");
    double Hyperparams::*field = nullptr;
    if (key == "alpha") field = &Hyperparams::alpha;
    else if (key == "nu") field = &Hyperparams::nu;
    else if (key == "gamma") field = &Hyperparams::gamma;
    else if (key == "beta") field = &Hyperparams::beta;
    else throw Error("unknown grid key \"" + key + "\" (expected alpha, nu, gamma or beta)");
    std::vector<Hyperparams> expanded;
    for (const auto& p : grid) {
      for (double v : values) {
        Hyperparams q = p;
        q.*field = v;
        expanded.push_back(q);
      }
    }
    grid = std::move(expanded);
  }
  return grid;
}

// Reorders the columns of `ds` to `names`, failing on the first missing one.
Dataset project(const Dataset& ds, const std::vector<std::string>& names) {
  std::vector<std::size_t> pos;
  for (const auto& name : names) {
    auto j = ds.find_attribute(name);
    if (!j) throw Error("input is missing column \"" + name + "\"");
    pos.push_back(*j);
  }
  std::vector<double> values;
  values.reserve(ds.rows() * names.size());
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j : pos) values.push_back(ds.at(i, j));
  }
  Dataset out(names, std::move(values));
  if (ds.has_labels()) out.set_labels(ds.labels());
  if (ds.has_classes()) out.set_classes(ds.classes());
  return out;
}

std::optional<std::string> opt(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

struct TrainArgs {
  std::string input, output, label_column, cv;
  Hyperparams params;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  a.params.validate();
  Dataset ds = load_csv(a.input, opt(a.label_column));
  if (ds.has_classes()) {
    throw Error("label column \"" + a.label_column + "\" must hold target/outlier values");
  }
  Hyperparams chosen = a.params;
  if (!a.cv.empty()) {
    if (!ds.has_labels()) ds.set_labels(std::vector<Label>(ds.rows(), Label::kTarget));
    const auto grid = parse_grid(a.cv, a.params);
    const auto cv = eval::kfold_cv_grid_search(ds, grid, a.folds, RngSeed{a.seed});
    chosen = cv.best_params;
    out << "cv: " << cv.fits << " fits over " << grid.size() << " parameter sets, "
        << a.folds << " folds\n";
    out << "selected: gamma=" << format_double(chosen.gamma)
        << " alpha=" << format_double(chosen.alpha) << " beta=" << format_double(chosen.beta)
        << " nu=" << format_double(chosen.nu) << '\n';
  }
  if (ds.has_labels()) ds = ds.subset(ds.indices_with(Label::kTarget));
  const auto tree = fit(ds, chosen);
  io::save_model(tree, a.output);
  out << "training accuracy: " << format_double(tree.training_accuracy()) << '\n'
      << "target leaves: " << tree.leaf_count() << '\n'
      << "levels grown: " << tree.levels_grown() << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input,
                const std::string& label_column, const std::string& out_path,
                std::ostream& out) {
  const auto tree = io::load_model(model_path);
  const auto ds = project(load_csv(input, opt(label_column)), tree.attribute_names());
  std::ofstream file;
  std::ostream* sink = &out;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw Error("cannot write " + out_path);
    sink = &file;
  }
  for (std::size_t i = 0; i < ds.rows(); ++i) *sink << label_name(tree.predict(ds.row(i))) << '\n';
  return 0;
}

int cmd_rules(const std::string& model_path, const std::string& format, std::ostream& out) {
  if (format != "text" && format != "json") {
    throw Error("unknown format \"" + format + "\" (supported: text, json)");
  }
  const auto rules = extract_rules(io::load_model(model_path));
  if (format == "text") {
    out << io::rules_to_text(rules);
  } else {
    out << io::rules_to_json(rules).dump(2) << '\n';
  }
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& input,
                 const std::string& label_column, std::ostream& out) {
  const auto tree = io::load_model(model_path);
  const auto raw = load_csv(input, label_column);
  if (!raw.has_labels()) {
    throw Error("column \"" + label_column + "\" must hold target/outlier labels");
  }
  const auto ds = project(raw, tree.attribute_names());
  const auto c = eval::confusion(tree.predict(ds), ds.labels());
  const auto m = eval::metrics(c);
  out << "rows: " << c.total() << '\n'
      << "TT: " << c.tt << "  FT: " << c.ft << "  FO: " << c.fo << "  TO: " << c.to << '\n'
      << "precision: " << format_double(m.precision) << '\n'
      << "recall: " << format_double(m.recall) << '\n'
      << "f1: " << format_double(m.f1) << '\n';
  return 0;
}

struct BenchArgs {
  std::string input, label_column = "class", approach = "A", noise = "2,5,10,15", seeds = "0",
                     out_path, name, grid = "default";
  std::size_t folds = 10;
  std::size_t grid_points = kde::kDefaultGridPoints;
  bool no_timing = false;
};

int cmd_benchmark(const BenchArgs& a, std::ostream& out) {
  const auto ds = load_csv(a.input, a.label_column);
  if (!ds.has_classes()) {
    throw Error("column \"" + a.label_column + "\" must hold class identifiers");
  }
  eval::BenchmarkConfig config;
  config.dataset_name = a.name.empty() ? std::filesystem::path(a.input).stem().string() : a.name;
  config.approach = a.approach == "A" ? eval::Approach::kA : eval::Approach::kB;
  for (double pct : parse_list(a.noise, "--noise")) config.noise_levels.push_back(pct / 100.0);
  Hyperparams base;
  base.grid_points = a.grid_points;
  config.grid = parse_grid(a.grid, base);
  config.folds = a.folds;
  config.seeds.clear();
  for (double s : parse_list(a.seeds, "--seeds")) {
    if (s < 0 || s != static_cast<double>(static_cast<std::uint64_t>(s))) {
      throw Error("seeds must be non-negative integers");
    }
    config.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  config.record_timing = !a.no_timing;
  const auto rows = eval::run_benchmark(ds, config);
  if (a.out_path.empty()) {
    eval::write_report_csv(out, rows);
  } else {
    std::ofstream file(a.out_path);
    if (!file) throw Error("cannot write " + a.out_path);
    eval::write_report_csv(file, rows);
    out << "wrote " << rows.size() << " rows to " << a.out_path << '\n';
  }
  return 0;
}

struct BlobArgs {
  std::string out_path;
  std::size_t n = 1000;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

int cmd_blobs(const BlobArgs& a, std::ostream& out) {
  auto ds = eval::three_blobs(a.n, RngSeed{a.seed});
  ds = inject_uniform_outliers(ds, a.noise / 100.0, RngSeed{a.seed + 1});
  write_csv(ds, a.out_path, "label");
  out << "wrote " << ds.rows() << " rows to " << a.out_path << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"One-class decision trees built from kernel density estimates", "octree"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Grow a tree and write the model file");
  t->add_option("--input", train.input, "Training CSV")->required();
  t->add_option("--output", train.output, "Model file to write")->required();
  t->add_option("--label-column", train.label_column,
                "Column with target/outlier labels; outliers only enter CV validation");
  t->add_option("--gamma", train.params.gamma, "Clipping level")->capture_default_str();
  t->add_option("--alpha", train.params.alpha, "Revision significance")->capture_default_str();
  t->add_option("--beta", train.params.beta, "Minimum interval support")->capture_default_str();
  t->add_option("--nu", train.params.nu, "Tolerated training rejection")->capture_default_str();
  t->add_option("--grid-points", train.params.grid_points, "Density grid size")
      ->capture_default_str();
  t->add_option("--min-leaf", train.params.min_leaf, "Minimum rows per node when beta > 0")
      ->capture_default_str();
  t->add_option("--cv", train.cv, "Grid to tune: 'default' or 'alpha=..;nu=..'");
  t->add_option("--folds", train.folds, "Cross-validation folds")->capture_default_str();
  t->add_option("--seed", train.seed, "Seed for fold assignment")->capture_default_str();

  std::string model, input, label_column, out_path, format = "text";
  auto* p = app.add_subcommand("predict", "Label every row of a CSV as target or outlier");
  p->add_option("--model", model)->required();
  p->add_option("--input", input)->required();
  p->add_option("--label-column", label_column, "Column to ignore when reading the input");
  p->add_option("--out", out_path, "Write labels here instead of stdout");

  auto* r = app.add_subcommand("rules", "Print the target hyper-rectangles");
  r->add_option("--model", model)->required();
  r->add_option("--format", format, "text or json")->capture_default_str();

  std::string eval_label = "label";
  auto* e = app.add_subcommand("evaluate", "Confusion counts and precision/recall/F1");
  e->add_option("--model", model)->required();
  e->add_option("--input", input)->required();
  e->add_option("--label-column", eval_label)->capture_default_str();

  BenchArgs bench;
  auto* b = app.add_subcommand("benchmark", "Run the noise-injection / one-vs-rest protocol");
  b->add_option("--input", bench.input, "Multi-class CSV")->required();
  b->add_option("--label-column", bench.label_column)->capture_default_str();
  b->add_option("--approach", bench.approach, "A (uniform noise) or B (one vs rest)")
      ->check(CLI::IsMember({"A", "B"}))
      ->capture_default_str();
  b->add_option("--noise", bench.noise, "Noise levels in percent")->capture_default_str();
  b->add_option("--folds", bench.folds)->capture_default_str();
  b->add_option("--seeds", bench.seeds, "Comma-separated seeds")->capture_default_str();
  b->add_option("--grid", bench.grid, "Parameter grid")->capture_default_str();
  b->add_option("--grid-points", bench.grid_points)->capture_default_str();
  b->add_option("--name", bench.name, "Dataset name in the report");
  b->add_option("--out", bench.out_path, "Report CSV (stdout when omitted)");
  b->add_flag("--no-timing", bench.no_timing, "Report 0 seconds so reruns are byte-identical");

  BlobArgs blobs;
  auto* g = app.add_subcommand("blobs", "Write the synthetic three-blob dataset");
  g->add_option("--out", blobs.out_path)->required();
  g->add_option("--n", blobs.n)->capture_default_str();
  g->add_option("--noise", blobs.noise, "Uniform outliers in percent")->capture_default_str();
  g->add_option("--seed", blobs.seed)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }

  try {
    if (*t) return cmd_train(train, out);
    if (*p) return cmd_predict(model, input, label_column, out_path, out);
    if (*r) return cmd_rules(model, format, out);
    if (*e) return cmd_evaluate(model, input, eval_label, out);
    if (*b) return cmd_benchmark(bench, out);
    if (*g) return cmd_blobs(blobs, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace octree::cli
