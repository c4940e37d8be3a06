#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace octree {

enum class Label : std::uint8_t { kTarget, kOutlier };

const char* label_name(Label label);  // "target" / "outlier"

struct RngSeed {
  std::uint64_t value = 0;
};

// Dense row-major matrix of finite values with named attributes.
//
// Rows may carry either one-class labels (target/outlier) or raw class
// identifiers from a multi-class source; never both.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> attribute_names, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  bool empty() const { return rows_ == 0; }

  const std::vector<std::string>& attribute_names() const { return names_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols(), cols()};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double> column(std::size_t j) const;
  std::optional<std::size_t> find_attribute(const std::string& name) const;

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<Label>& labels() const;
  void set_labels(std::vector<Label> labels);
  void clear_labels() { labels_.reset(); }

  bool has_classes() const { return classes_.has_value(); }
  const std::vector<std::string>& classes() const;
  void set_classes(std::vector<std::string> classes);
  // Distinct class ids in order of first appearance.
  std::vector<std::string> class_ids() const;

  // Rows selected by index, labels/classes carried along.
  Dataset subset(std::span<const std::size_t> indices) const;
  // Appends rows of `other` (same attributes, same kind of labels).
  void append(const Dataset& other);
  // Rows whose one-class label equals `label`.
  std::vector<std::size_t> indices_with(Label label) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::size_t rows_ = 0;
  std::optional<std::vector<Label>> labels_;
  std::optional<std::vector<std::string>> classes_;
};

// Reads a headered comma-separated file. If `label_column` is given, that
// column becomes one-class labels when every cell is target/outlier
// (case-insensitive), and raw class ids otherwise.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);

// Writes values with shortest round-trip precision; labels (if any) go to a
// trailing column named `label_column`.
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column = "label");

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds,
                                             double train_fraction, RngSeed seed);

// Relabels every row Target, then appends round(fraction * n) Outlier rows
// drawn uniformly inside the per-attribute data range.
Dataset inject_uniform_outliers(const Dataset& ds, double fraction, RngSeed seed);

// Keeps all rows of `target_class` as Target and samples
// round(outlier_fraction * n_target) other rows, without replacement, as Outlier.
Dataset one_vs_rest(const Dataset& ds, const std::string& target_class,
                    double outlier_fraction, RngSeed seed);

// Isotropic Gaussian blobs; rows are assigned to blobs round-robin.
Dataset gaussian_blobs(const std::vector<std::vector<double>>& centers,
                       const std::vector<double>& stds, std::size_t n, RngSeed seed);

}  // namespace octree
