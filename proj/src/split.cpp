#include "octree/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "octree/error.hpp"

namespace octree::split {

namespace {

std::size_t index_of(const kde::DensityGrid& grid, double abscissa) {
  auto it = std::lower_bound(grid.points.begin(), grid.points.end(), abscissa);
  if (it == grid.points.end()) return grid.points.size() - 1;
  return static_cast<std::size_t>(it - grid.points.begin());
}

}  // namespace

std::size_t support_floor(const SplitParams& params) {
  if (params.beta == 0.0) return 0;
  // The small offset absorbs representation error, e.g. 0.07 * 100.
  const double raw = params.beta * static_cast<double>(params.n_root);
  const auto from_beta = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max(from_beta, params.min_leaf);
}

std::vector<Interval> clip(const kde::DensityGrid& grid, double gamma) {
  const double threshold = gamma * grid.max_density();
  std::vector<Interval> runs;
  const std::size_t g = grid.densities.size();
  std::size_t i = 0;
  while (i < g) {
    if (grid.densities[i] < threshold) {
      ++i;
      continue;
    }
    std::size_t e = i;
    while (e + 1 < g && grid.densities[e + 1] >= threshold) ++e;
    runs.push_back({grid.points[i], grid.points[e]});
    i = e + 1;
  }
  return runs;
}

std::vector<Interval> revise(const std::vector<Interval>& intervals,
                             const kde::DensityGrid& grid, double alpha) {
  const std::size_t k = grid.mode_count();
  if (k <= 1 || intervals.size() >= k) return intervals;

  const auto& d = grid.densities;
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    const std::size_t s = index_of(grid, iv.low);
    const std::size_t e = index_of(grid, iv.high);
    std::vector<std::size_t> cuts;
    for (std::size_t m : grid.minima) {
      if (m <= s || m >= e) continue;
      // nearest maxima on either side, restricted to the interval
      std::optional<std::size_t> left, right;
      for (std::size_t mx : grid.maxima) {
        if (mx >= s && mx < m) left = mx;
        if (mx > m && mx <= e && !right) right = mx;
      }
      if (!left || !right) continue;
      if (d[m] <= alpha * std::min(d[*left], d[*right])) cuts.push_back(m);
    }
    double low = iv.low;
    for (std::size_t m : cuts) {
      out.push_back({low, grid.points[m]});
      low = grid.points[m];
    }
    out.push_back({low, iv.high});
  }
  return out;
}

std::vector<std::size_t> member_counts(const std::vector<Interval>& intervals,
                                       std::span<const double> values) {
  std::vector<std::size_t> counts(intervals.size(), 0);
  for (double v : values) {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (intervals[i].contains(v)) {
        ++counts[i];
        break;
      }
    }
  }
  return counts;
}

std::vector<Interval> assess(const std::vector<Interval>& intervals,
                             std::span<const double> values, const SplitParams& params) {
  const std::size_t floor = support_floor(params);
  const auto counts = member_counts(intervals, values);
  std::vector<Interval> kept;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (counts[i] >= floor) kept.push_back(intervals[i]);
  }
  return kept;
}

std::vector<Interval> shrink(const std::vector<Interval>& intervals,
                             std::span<const double> values) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<Interval> tight(intervals.size(), Interval{kInf, -kInf});
  for (double v : values) {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (intervals[i].contains(v)) {
        tight[i].low = std::min(tight[i].low, v);
        tight[i].high = std::max(tight[i].high, v);
        break;
      }
    }
  }
  std::vector<Interval> out;
  for (const auto& iv : tight) {
    if (iv.low <= iv.high) out.push_back(iv);
  }
  std::sort(out.begin(), out.end(),
            [](const Interval& a, const Interval& b) { return a.low < b.low; });
  return out;
}

double impurity_proxy(std::span<const std::size_t> counts,
                      std::span<const Interval> intervals, const Interval& node_range,
                      std::size_t n_t) {
  if (counts.size() != intervals.size()) throw Error("one count per interval is required");
  const double node_width = node_range.high - node_range.low;
  if (!(node_width > 0.0)) throw Error("impurity proxy needs a node range of positive width");
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double targets = static_cast<double>(counts[i]);
    const double virtual_outliers =
        static_cast<double>(n_t) * (intervals[i].high - intervals[i].low) / node_width;
    const double denom = targets + virtual_outliers;
    if (denom == 0.0) continue;
    total += targets * virtual_outliers / denom;
  }
  return total;
}

std::optional<SplitCandidate> propose_split(std::span<const double> values,
                                            std::size_t attribute,
                                            const Interval& node_range,
                                            const SplitParams& params) {
  if (values.empty()) return std::nullopt;
  const auto model = kde::KdeModel::fit(values);
  if (!model.evaluable()) return std::nullopt;
  if (!(node_range.width() > 0.0)) return std::nullopt;

  const double h = model.bandwidth();
  const auto grid = kde::evaluate_grid(model, model.sample().front() - h,
                                       model.sample().back() + h, params.grid_points);
  auto intervals = clip(grid, params.gamma);
  intervals = revise(intervals, grid, params.alpha);
  intervals = assess(intervals, values, params);
  intervals = shrink(intervals, values);
  if (intervals.empty()) return std::nullopt;

  SplitCandidate c;
  c.attribute = attribute;
  c.counts = member_counts(intervals, values);
  c.proxy = impurity_proxy(c.counts, intervals, node_range, values.size());
  std::size_t gaps = intervals.size() - 1;
  if (intervals.front().low > node_range.low) ++gaps;
  if (intervals.back().high < node_range.high) ++gaps;
  c.interval_total = intervals.size() + gaps;
  c.target_intervals = std::move(intervals);
  return c;
}

}  // namespace octree::split
