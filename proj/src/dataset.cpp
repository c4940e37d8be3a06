#include "octree/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "octree/error.hpp"
#include "octree/format.hpp"

namespace octree {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

void check_unique(const std::vector<std::string>& names) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw Error("duplicate attribute name \"" + n + "\"");
  }
}

}  // namespace

const char* label_name(Label label) {
  return label == Label::kTarget ? "target" : "outlier";
}

Dataset::Dataset(std::vector<std::string> attribute_names, std::vector<double> values)
    : names_(std::move(attribute_names)), values_(std::move(values)) {
  if (names_.empty()) throw Error("dataset needs at least one attribute");
  check_unique(names_);
  if (values_.size() % names_.size() != 0) {
    throw Error("value count is not a multiple of the attribute count");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error("dataset values must be finite");
  }
  rows_ = values_.size() / names_.size();
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = at(i, j);
  return out;
}

std::optional<std::size_t> Dataset::find_attribute(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<Label>& Dataset::labels() const {
  if (!labels_) throw Error("dataset has no target/outlier labels");
  return *labels_;
}

void Dataset::set_labels(std::vector<Label> labels) {
  if (labels.size() != rows_) throw Error("label count differs from row count");
  labels_ = std::move(labels);
  classes_.reset();
}

const std::vector<std::string>& Dataset::classes() const {
  if (!classes_) throw Error("dataset has no class column");
  return *classes_;
}

void Dataset::set_classes(std::vector<std::string> classes) {
  if (classes.size() != rows_) throw Error("class count differs from row count");
  classes_ = std::move(classes);
  labels_.reset();
}

std::vector<std::string> Dataset::class_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& c : classes()) {
    if (seen.insert(c).second) ids.push_back(c);
  }
  return ids;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.names_ = names_;
  out.rows_ = indices.size();
  out.values_.reserve(indices.size() * cols());
  for (std::size_t i : indices) {
    auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
  }
  if (labels_) {
    std::vector<Label> l;
    l.reserve(indices.size());
    for (std::size_t i : indices) l.push_back((*labels_)[i]);
    out.labels_ = std::move(l);
  }
  if (classes_) {
    std::vector<std::string> c;
    c.reserve(indices.size());
    for (std::size_t i : indices) c.push_back((*classes_)[i]);
    out.classes_ = std::move(c);
  }
  return out;
}

void Dataset::append(const Dataset& other) {
  if (other.names_ != names_) throw Error("cannot append rows with different attributes");
  if (has_labels() != other.has_labels() || has_classes() != other.has_classes()) {
    throw Error("cannot append rows with a different labelling");
  }
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  rows_ += other.rows_;
  if (labels_) labels_->insert(labels_->end(), other.labels_->begin(), other.labels_->end());
  if (classes_) {
    classes_->insert(classes_->end(), other.classes_->begin(), other.classes_->end());
  }
}

std::vector<std::size_t> Dataset::indices_with(Label label) const {
  std::vector<std::size_t> out;
  const auto& l = labels();
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == label) out.push_back(i);
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto cell : split_commas(line)) header.emplace_back(cell);
  check_unique(header);

  std::optional<std::size_t> label_idx;
  if (label_column) {
    auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) {
      throw Error(path.string() + ": label column \"" + *label_column + "\" not found");
    }
    label_idx = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) names.push_back(header[c]);
  }
  if (names.empty()) throw Error(path.string() + ": no attribute columns");

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw Error(path.string() + ": row " + std::to_string(row) + " (line " +
                  std::to_string(line_no) + ") has " + std::to_string(cells.size()) +
                  " cells, expected " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_idx) {
        raw_labels.emplace_back(cells[c]);
        continue;
      }
      auto v = parse_number(cells[c]);
      if (!v) {
        throw Error(path.string() + ": row " + std::to_string(row) + " (line " +
                    std::to_string(line_no) + "), column \"" + header[c] +
                    "\": cannot parse \"" + std::string(cells[c]) + "\" as a finite number");
      }
      values.push_back(*v);
    }
  }

  Dataset ds(std::move(names), std::move(values));
  if (label_idx) {
    bool one_class = true;
    std::vector<Label> labels;
    labels.reserve(raw_labels.size());
    for (const auto& s : raw_labels) {
      const std::string l = lower(s);
      if (l == "target") {
        labels.push_back(Label::kTarget);
      } else if (l == "outlier") {
        labels.push_back(Label::kOutlier);
      } else {
        one_class = false;
        break;
      }
    }
    if (one_class && !raw_labels.empty()) {
      ds.set_labels(std::move(labels));
    } else {
      ds.set_classes(std::move(raw_labels));
    }
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file " + path.string());
  const auto& names = ds.attribute_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  const bool labelled = ds.has_labels() || ds.has_classes();
  if (labelled) out << ',' << label_column;
  out << '\n';
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j) {
      out << (j ? "," : "") << format_double(ds.at(i, j));
    }
    if (ds.has_labels()) out << ',' << label_name(ds.labels()[i]);
    if (ds.has_classes()) out << ',' << ds.classes()[i];
    out << '\n';
  }
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_fraction,
                                             RngSeed seed) {
  if (ds.empty()) throw Error("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw Error("train fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(ds.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed.value);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(ds.rows())));
  std::span<const std::size_t> all(order);
  return {ds.subset(all.first(n_train)), ds.subset(all.subspan(n_train))};
}

Dataset inject_uniform_outliers(const Dataset& ds, double fraction, RngSeed seed) {
  if (ds.empty()) throw Error("cannot inject outliers into an empty dataset");
  if (!(fraction >= 0.0) || !std::isfinite(fraction)) {
    throw Error("outlier fraction must be a finite value >= 0");
  }
  const std::size_t n = ds.rows();
  const std::size_t d = ds.cols();
  std::vector<double> lo(d), hi(d);
  for (std::size_t j = 0; j < d; ++j) {
    lo[j] = hi[j] = ds.at(0, j);
    for (std::size_t i = 1; i < n; ++i) {
      lo[j] = std::min(lo[j], ds.at(i, j));
      hi[j] = std::max(hi[j], ds.at(i, j));
    }
  }
  const auto extra = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));

  std::mt19937_64 rng(seed.value);
  std::vector<double> values = ds.values();
  values.reserve(values.size() + extra * d);
  for (std::size_t i = 0; i < extra; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      std::uniform_real_distribution<double> u(lo[j], hi[j]);
      // uniform_real_distribution is half-open and may round up to hi.
      values.push_back(std::clamp(u(rng), lo[j], hi[j]));
    }
  }
  Dataset out(ds.attribute_names(), std::move(values));
  std::vector<Label> labels(n, Label::kTarget);
  labels.resize(n + extra, Label::kOutlier);
  out.set_labels(std::move(labels));
  return out;
}

Dataset one_vs_rest(const Dataset& ds, const std::string& target_class,
                    double outlier_fraction, RngSeed seed) {
  if (!(outlier_fraction >= 0.0) || !std::isfinite(outlier_fraction)) {
    throw Error("outlier fraction must be a finite value >= 0");
  }
  const auto& classes = ds.classes();
  std::vector<std::size_t> targets, others;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    (classes[i] == target_class ? targets : others).push_back(i);
  }
  if (targets.empty()) throw Error("class \"" + target_class + "\" not present");
  const auto wanted = static_cast<std::size_t>(
      std::llround(outlier_fraction * static_cast<double>(targets.size())));
  if (wanted > others.size()) {
    throw Error("requested " + std::to_string(wanted) + " outliers but only " +
                std::to_string(others.size()) + " non-target rows are available");
  }
  std::mt19937_64 rng(seed.value);
  std::shuffle(others.begin(), others.end(), rng);
  others.resize(wanted);
  std::sort(others.begin(), others.end());

  std::vector<std::size_t> picked = targets;
  picked.insert(picked.end(), others.begin(), others.end());
  Dataset out = ds.subset(picked);
  std::vector<Label> labels(targets.size(), Label::kTarget);
  labels.resize(picked.size(), Label::kOutlier);
  out.set_labels(std::move(labels));
  return out;
}

Dataset gaussian_blobs(const std::vector<std::vector<double>>& centers,
                       const std::vector<double>& stds, std::size_t n, RngSeed seed) {
  if (centers.empty()) throw Error("gaussian_blobs needs at least one center");
  if (stds.size() != centers.size()) throw Error("one deviation per center is required");
  if (n == 0) throw Error("gaussian_blobs needs n > 0");
  const std::size_t d = centers.front().size();
  if (d == 0) throw Error("centers must have at least one coordinate");
  for (std::size_t b = 0; b < centers.size(); ++b) {
    if (centers[b].size() != d) throw Error("all centers must share one dimension");
    if (!(stds[b] > 0.0)) throw Error("blob deviations must be > 0");
  }

  std::mt19937_64 rng(seed.value);
  std::vector<double> values;
  values.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i % centers.size();
    for (std::size_t j = 0; j < d; ++j) {
      std::normal_distribution<double> g(centers[b][j], stds[b]);
      values.push_back(g(rng));
    }
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("a" + std::to_string(j + 1));
  Dataset out(std::move(names), std::move(values));
  out.set_labels(std::vector<Label>(n, Label::kTarget));
  return out;
}

}  // namespace octree
