#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "octree/dataset.hpp"
#include "octree/tree.hpp"

namespace octree::eval {

struct ConfusionCounts {
  std::size_t tt = 0;  // predicted target, actually target
  std::size_t ft = 0;  // predicted target, actually outlier
  std::size_t fo = 0;  // predicted outlier, actually target
  std::size_t to = 0;  // predicted outlier, actually outlier

  std::size_t total() const { return tt + ft + fo + to; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ConfusionCounts confusion(std::span<const Label> predicted, std::span<const Label> actual);

// P = TT/(TT+FT), R = TT/(TT+FO), F1 = 2PR/(P+R); every 0/0 is taken as 0.
MetricsReport metrics(const ConfusionCounts& c);

// Scores `tree` on a labelled dataset.
MetricsReport score(const OcTree& tree, const Dataset& labelled);

// alpha = {0.5, 0.6, 0.7, 0.8} x nu = {0.05, 0.1, 0.15, 0.2}, gamma = 0.05,
// beta = 2% with at least 5 rows per node; alpha varies slowest.
std::vector<Hyperparams> default_grid();

struct CvResult {
  Hyperparams best_params;
  std::vector<double> mean_f1;  // one per grid entry, grid order
  std::size_t fits = 0;
};

// Target rows are dealt into k seeded folds. Each grid entry is fitted on k-1
// folds and validated on the held-out fold plus every Outlier row.
CvResult kfold_cv_grid_search(const Dataset& train, std::span<const Hyperparams> grid,
                              std::size_t k, RngSeed seed);

// Fold id per Target row (in `indices_with(kTarget)` order); exposed for tests.
std::vector<std::size_t> assign_folds(std::size_t n_targets, std::size_t k, RngSeed seed);

enum class Approach { kA, kB };

struct BenchmarkConfig {
  std::string dataset_name = "dataset";
  Approach approach = Approach::kA;
  std::vector<double> noise_levels;  // fractions, e.g. 0.02
  std::vector<Hyperparams> grid = default_grid();
  std::size_t folds = 10;
  std::vector<std::uint64_t> seeds{0};
  double train_fraction = 2.0 / 3.0;
  bool record_timing = true;
};

struct BenchmarkRow {
  std::string dataset;
  std::string variant;
  double noise_level = 0.0;
  MetricsReport metrics;
  double chosen_alpha = 0.0;
  double chosen_nu = 0.0;
  double train_accuracy = 0.0;
  double target_leaves = 0.0;
  double seconds = 0.0;
};

// One row per (variant, noise level, seed); when several seeds are given a
// "<variant>/mean" row follows each group.
std::vector<BenchmarkRow> run_benchmark(const Dataset& source, const BenchmarkConfig& config);

// Three well-separated 2-D Gaussian blobs (unit deviation) used by the
// synthetic experiment; rows are Target.
Dataset three_blobs(std::size_t n, RngSeed seed);

void write_report_csv(std::ostream& out, std::span<const BenchmarkRow> rows);

}  // namespace octree::eval
