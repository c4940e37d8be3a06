#include "octree/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "octree/error.hpp"

namespace octree::kde {

namespace {

// exp(-y^2 / 2) underflows to exactly 0.0 for |y| > ~38.6, so skipping
// kernels beyond this radius leaves the sum bit-identical.
constexpr double kKernelCutoff = 40.0;

void check_grid_args(const KdeModel& model, double lo, double hi, std::size_t grid_points) {
  if (!model.evaluable()) throw Error("density model with zero bandwidth cannot be evaluated");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error("grid bounds must satisfy lo < hi");
  }
  if (grid_points < kMinGridPoints) {
    throw Error("grid needs at least " + std::to_string(kMinGridPoints) + " points");
  }
}

double grid_point(double lo, double hi, std::size_t i, std::size_t grid_points) {
  if (i + 1 == grid_points) return hi;
  return lo + static_cast<double>(i) * ((hi - lo) / static_cast<double>(grid_points - 1));
}

void finish_grid(DensityGrid& grid) {
  auto ext = find_extrema(grid.densities);
  grid.maxima = std::move(ext.maxima);
  grid.minima = std::move(ext.minima);
  if (grid.maxima.empty()) {
    // Degenerate flat curve: the global maximum still counts as a mode.
    auto it = std::max_element(grid.densities.begin(), grid.densities.end());
    grid.maxima.push_back(static_cast<std::size_t>(it - grid.densities.begin()));
  }
}

}  // namespace

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(below);
  if (below + 1 >= sorted.size()) return sorted.back();
  return sorted[below] + frac * (sorted[below + 1] - sorted[below]);
}

double silverman_bandwidth(std::span<const double> sample) {
  if (sample.empty()) throw Error("bandwidth of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw Error("sample contains a non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  double sd = 0.0;
  // a constant sample has sd exactly 0, whatever rounding the mean picks up
  if (sorted.front() != sorted.back()) {
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    sd = std::sqrt(ss / (n - 1.0));
  }
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  const double spread = iqr != 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

KdeModel KdeModel::fit(std::span<const double> sample) {
  if (sample.empty()) throw Error("cannot fit a density model to an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw Error("sample contains a non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  const double h = silverman_bandwidth(sorted);
  return KdeModel(std::move(sorted), h);
}

KdeModel KdeModel::with_bandwidth(std::span<const double> sample, double bandwidth) {
  if (sample.empty()) throw Error("cannot fit a density model to an empty sample");
  if (!(bandwidth >= 0.0) || !std::isfinite(bandwidth)) {
    throw Error("bandwidth must be finite and >= 0");
  }
  std::vector<double> sorted(sample.begin(), sample.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw Error("sample contains a non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  return KdeModel(std::move(sorted), bandwidth);
}

double KdeModel::evaluate(double z) const {
  if (!evaluable()) throw Error("density model with zero bandwidth cannot be evaluated");
  const double h = bandwidth_;
  const double reach = kKernelCutoff * h;
  auto first = std::lower_bound(sample_.begin(), sample_.end(), z - reach);
  auto last = std::upper_bound(first, sample_.end(), z + reach);
  double sum = 0.0;
  for (auto it = first; it != last; ++it) {
    const double y = (z - *it) / h;
    sum += std::exp(-0.5 * y * y);
  }
  constexpr double kInvSqrt2Pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return sum * kInvSqrt2Pi / (static_cast<double>(sample_.size()) * h);
}

Extrema find_extrema(std::span<const double> d) {
  const std::size_t g = d.size();
  if (g < 3) throw Error("extrema search needs at least 3 grid values");
  Extrema out;
  std::size_t s = 0;
  while (s < g) {
    std::size_t e = s;
    while (e + 1 < g && d[e + 1] == d[s]) ++e;
    if (s == 0 && e == g - 1) {
      // flat everywhere
    } else if (s == 0) {
      if (e == 0) {
        if (d[0] > d[1]) out.maxima.push_back(0);
        if (d[0] < d[1]) out.minima.push_back(0);
      }
    } else if (e == g - 1) {
      if (s == g - 1) {
        if (d[s] > d[s - 1]) out.maxima.push_back(s);
        if (d[s] < d[s - 1]) out.minima.push_back(s);
      }
    } else {
      if (d[s] > d[s - 1] && d[s] > d[e + 1]) out.maxima.push_back(s);
      if (d[s] < d[s - 1] && d[s] < d[e + 1]) out.minima.push_back(s);
    }
    s = e + 1;
  }
  return out;
}

double DensityGrid::max_density() const {
  return densities.empty() ? 0.0 : *std::max_element(densities.begin(), densities.end());
}

DensityGrid evaluate_grid_serial(const KdeModel& model, double lo, double hi,
                                 std::size_t grid_points) {
  check_grid_args(model, lo, hi, grid_points);
  DensityGrid grid;
  grid.points.resize(grid_points);
  grid.densities.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid.points[i] = grid_point(lo, hi, i, grid_points);
    grid.densities[i] = model.evaluate(grid.points[i]);
  }
  finish_grid(grid);
  return grid;
}

DensityGrid evaluate_grid(const KdeModel& model, double lo, double hi,
                          std::size_t grid_points) {
  check_grid_args(model, lo, hi, grid_points);
  DensityGrid grid;
  grid.points.resize(grid_points);
  grid.densities.resize(grid_points);
  const auto count = static_cast<std::ptrdiff_t>(grid_points);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    grid.points[k] = grid_point(lo, hi, k, grid_points);
    grid.densities[k] = model.evaluate(grid.points[k]);
  }
  finish_grid(grid);
  return grid;
}

}  // namespace octree::kde
