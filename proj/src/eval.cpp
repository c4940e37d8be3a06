#include "octree/eval.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <random>

#include "octree/error.hpp"
#include "octree/format.hpp"

namespace octree::eval {

namespace {

// splitmix64 finaliser; gives each (seed, stream) pair its own generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

struct Outcome {
  MetricsReport metrics;
  Hyperparams chosen;
  double train_accuracy = 0.0;
  std::size_t leaves = 0;
  double seconds = 0.0;
};

Outcome evaluate_variant(const Dataset& train, const Dataset& test,
                         const BenchmarkConfig& config, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const auto cv = kfold_cv_grid_search(train, config.grid, config.folds, RngSeed{seed});
  const auto targets = train.indices_with(Label::kTarget);
  const auto model = fit(train.subset(targets), cv.best_params);
  Outcome o;
  o.metrics = score(model, test);
  o.chosen = cv.best_params;
  o.train_accuracy = model.training_accuracy();
  o.leaves = model.leaf_count();
  if (config.record_timing) {
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return o;
}

BenchmarkRow make_row(const BenchmarkConfig& config, std::string variant, double noise,
                      const Outcome& o) {
  BenchmarkRow row;
  row.dataset = config.dataset_name;
  row.variant = std::move(variant);
  row.noise_level = noise;
  row.metrics = o.metrics;
  row.chosen_alpha = o.chosen.alpha;
  row.chosen_nu = o.chosen.nu;
  row.train_accuracy = o.train_accuracy;
  row.target_leaves = static_cast<double>(o.leaves);
  row.seconds = o.seconds;
  return row;
}

BenchmarkRow mean_row(std::span<const BenchmarkRow> group, std::string variant) {
  BenchmarkRow m = group.front();
  m.variant = std::move(variant);
  const auto n = static_cast<double>(group.size());
  auto avg = [&](auto field) {
    double s = 0.0;
    for (const auto& r : group) s += field(r);
    return s / n;
  };
  m.metrics.precision = avg([](const BenchmarkRow& r) { return r.metrics.precision; });
  m.metrics.recall = avg([](const BenchmarkRow& r) { return r.metrics.recall; });
  // F1 of the mean row is recomputed from mean P and R so the harmonic
  // identity holds on every emitted row.
  m.metrics.f1 = harmonic(m.metrics.precision, m.metrics.recall);
  m.chosen_alpha = avg([](const BenchmarkRow& r) { return r.chosen_alpha; });
  m.chosen_nu = avg([](const BenchmarkRow& r) { return r.chosen_nu; });
  m.train_accuracy = avg([](const BenchmarkRow& r) { return r.train_accuracy; });
  m.target_leaves = avg([](const BenchmarkRow& r) { return r.target_leaves; });
  m.seconds = avg([](const BenchmarkRow& r) { return r.seconds; });
  return m;
}

}  // namespace

ConfusionCounts confusion(std::span<const Label> predicted, std::span<const Label> actual) {
  if (predicted.size() != actual.size()) {
    throw Error("predicted and actual label counts differ (" +
                std::to_string(predicted.size()) + " vs " + std::to_string(actual.size()) + ")");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_target = predicted[i] == Label::kTarget;
    const bool is_target = actual[i] == Label::kTarget;
    if (pred_target && is_target) ++c.tt;
    else if (pred_target) ++c.ft;
    else if (is_target) ++c.fo;
    else ++c.to;
  }
  return c;
}

MetricsReport metrics(const ConfusionCounts& c) {
  MetricsReport m;
  const auto tt = static_cast<double>(c.tt);
  if (c.tt + c.ft > 0) m.precision = tt / static_cast<double>(c.tt + c.ft);
  if (c.tt + c.fo > 0) m.recall = tt / static_cast<double>(c.tt + c.fo);
  m.f1 = harmonic(m.precision, m.recall);
  return m;
}

MetricsReport score(const OcTree& tree, const Dataset& labelled) {
  const auto predicted = tree.predict(labelled);
  return metrics(confusion(predicted, labelled.labels()));
}

std::vector<Hyperparams> default_grid() {
  std::vector<Hyperparams> grid;
  for (double alpha : {0.5, 0.6, 0.7, 0.8}) {
    for (double nu : {0.05, 0.1, 0.15, 0.2}) {
      Hyperparams p;
      p.gamma = 0.05;
      p.alpha = alpha;
      p.beta = 0.02;
      p.nu = nu;
      p.min_leaf = 5;
      grid.push_back(p);
    }
  }
  return grid;
}

std::vector<std::size_t> assign_folds(std::size_t n_targets, std::size_t k, RngSeed seed) {
  std::vector<std::size_t> order(n_targets);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed.value);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold(n_targets);
  for (std::size_t pos = 0; pos < n_targets; ++pos) fold[order[pos]] = pos % k;
  return fold;
}

CvResult kfold_cv_grid_search(const Dataset& train, std::span<const Hyperparams> grid,
                              std::size_t k, RngSeed seed) {
  if (grid.empty()) throw Error("parameter grid is empty");
  if (k < 2) throw Error("cross-validation needs at least 2 folds");
  for (const auto& p : grid) p.validate();
  const auto targets = train.indices_with(Label::kTarget);
  const auto outliers = train.indices_with(Label::kOutlier);
  if (k > targets.size()) {
    throw Error(std::to_string(k) + " folds requested but only " +
                std::to_string(targets.size()) + " target rows are available");
  }
  const auto fold = assign_folds(targets.size(), k, seed);

  std::vector<Dataset> fit_sets(k), validation_sets(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> fit_rows, val_rows;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      (fold[t] == f ? val_rows : fit_rows).push_back(targets[t]);
    }
    val_rows.insert(val_rows.end(), outliers.begin(), outliers.end());
    fit_sets[f] = train.subset(fit_rows);
    validation_sets[f] = train.subset(val_rows);
  }

  const std::size_t jobs = grid.size() * k;
  std::vector<double> f1(jobs, 0.0);
  const auto job_count = static_cast<std::ptrdiff_t>(jobs);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t job = 0; job < job_count; ++job) {
    const auto u = static_cast<std::size_t>(job);
    const std::size_t f = u % k;
    const auto model = fit(fit_sets[f], grid[u / k]);
    f1[u] = score(model, validation_sets[f]).f1;
  }

  CvResult result;
  result.fits = jobs;
  result.mean_f1.resize(grid.size(), 0.0);
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t f = 0; f < k; ++f) sum += f1[g * k + f];
    result.mean_f1[g] = sum / static_cast<double>(k);
    if (result.mean_f1[g] > result.mean_f1[best]) best = g;
  }
  result.best_params = grid[best];
  return result;
}

std::vector<BenchmarkRow> run_benchmark(const Dataset& source, const BenchmarkConfig& config) {
  if (source.empty()) throw Error("benchmark source dataset is empty");
  if (config.seeds.empty()) throw Error("benchmark needs at least one seed");
  for (double level : config.noise_levels) {
    if (!(level >= 0.0)) throw Error("noise levels must be >= 0");
  }

  std::vector<std::string> variants;
  if (config.approach == Approach::kA) {
    variants.push_back("A");
  } else {
    for (const auto& c : source.class_ids()) variants.push_back("B:" + c);
  }
  const bool many_seeds = config.seeds.size() > 1;

  std::vector<BenchmarkRow> rows;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t level = 0; level < config.noise_levels.size(); ++level) {
      const double noise = config.noise_levels[level];
      std::vector<BenchmarkRow> group;
      for (std::uint64_t base : config.seeds) {
        const std::uint64_t stream = (v * 1000 + level) * 8;
        Dataset train, test;
        if (config.approach == Approach::kA) {
          Dataset merged = source;
          merged.clear_labels();
          auto [tr, te] = train_test_split(merged, config.train_fraction,
                                           RngSeed{derive_seed(base, stream)});
          train = inject_uniform_outliers(tr, noise, RngSeed{derive_seed(base, stream + 1)});
          test = inject_uniform_outliers(te, noise, RngSeed{derive_seed(base, stream + 2)});
        } else {
          const std::string cls = variants[v].substr(2);
          auto one_class =
              one_vs_rest(source, cls, noise, RngSeed{derive_seed(base, stream + 3)});
          std::tie(train, test) = train_test_split(one_class, config.train_fraction,
                                                   RngSeed{derive_seed(base, stream)});
        }
        const auto outcome =
            evaluate_variant(train, test, config, derive_seed(base, stream + 4));
        std::string name = variants[v];
        if (many_seeds) name += "/seed=" + std::to_string(base);
        group.push_back(make_row(config, std::move(name), noise, outcome));
      }
      rows.insert(rows.end(), group.begin(), group.end());
      if (many_seeds) rows.push_back(mean_row(group, variants[v] + "/mean"));
    }
  }
  return rows;
}

Dataset three_blobs(std::size_t n, RngSeed seed) {
  return gaussian_blobs({{-6.0, -6.0}, {0.0, 6.0}, {7.0, -2.0}}, {1.0, 1.0, 1.0}, n, seed);
}

void write_report_csv(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << "dataset,variant,noise_level,precision,recall,f1,chosen_alpha,chosen_nu,"
         "train_accuracy,target_leaves,seconds\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.variant << ',' << format_double(r.noise_level) << ','
        << format_double(r.metrics.precision) << ',' << format_double(r.metrics.recall) << ','
        << format_double(r.metrics.f1) << ',' << format_double(r.chosen_alpha) << ','
        << format_double(r.chosen_nu) << ',' << format_double(r.train_accuracy) << ','
        << format_double(r.target_leaves) << ',' << format_double(r.seconds) << '\n';
  }
}

}  // namespace octree::eval
