#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "octree/kde.hpp"

namespace octree {

// Closed interval [low, high] in attribute units.
struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool contains(double v) const { return low <= v && v <= high; }
  double width() const { return high - low; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct SplitParams {
  double gamma = 0.05;
  double alpha = 0.5;
  double beta = 0.02;
  std::size_t n_root = 0;
  std::size_t min_leaf = 5;
  std::size_t grid_points = kde::kDefaultGridPoints;
};

struct SplitCandidate {
  std::size_t attribute = 0;
  std::vector<Interval> target_intervals;
  std::vector<std::size_t> counts;
  double proxy = 0.0;
  // Target intervals plus the outlier gaps around them inside the node range.
  std::size_t interval_total = 0;
};

namespace split {

// Minimum support of a surviving interval: 0 when beta == 0, otherwise
// max(ceil(beta * n_root), min_leaf).
std::size_t support_floor(const SplitParams& params);

// Maximal grid runs with density >= gamma * max density.
std::vector<Interval> clip(const kde::DensityGrid& grid, double gamma);

// Cuts clipped intervals at significant interior minima, i.e. minima whose
// density is <= alpha times the lower of the two nearest maxima inside the
// interval. Only runs when the density has k > 1 modes and fewer than k
// intervals survived clipping.
std::vector<Interval> revise(const std::vector<Interval>& intervals,
                             const kde::DensityGrid& grid, double alpha);

// Each value belongs to the first interval that contains it; this keeps the
// shared endpoint of two revised halves from being counted twice.
std::vector<std::size_t> member_counts(const std::vector<Interval>& intervals,
                                       std::span<const double> values);

std::vector<Interval> assess(const std::vector<Interval>& intervals,
                             std::span<const double> values, const SplitParams& params);

// Replaces every interval by the [min, max] of its members; empty ones vanish.
std::vector<Interval> shrink(const std::vector<Interval>& intervals,
                             std::span<const double> values);

// Gini-decrease proxy against n_t virtual outliers spread uniformly over the
// node range: sum_i n_i * n'_i / (n_i + n'_i), n'_i = n_t * width_i / width_node.
double impurity_proxy(std::span<const std::size_t> counts,
                      std::span<const Interval> intervals, const Interval& node_range,
                      std::size_t n_t);

// Full division pipeline for one attribute at one node. Returns nothing when
// the attribute has zero bandwidth or no interval survives.
std::optional<SplitCandidate> propose_split(std::span<const double> values,
                                            std::size_t attribute,
                                            const Interval& node_range,
                                            const SplitParams& params);

}  // namespace split
}  // namespace octree
