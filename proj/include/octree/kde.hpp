#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace octree::kde {

// Silverman's rule of thumb with an IQR-free fallback:
//   h = 0.9 * min(sd, IQR / 1.34) * n^(-1/5)   if IQR != 0
//   h = 0.9 * sd * n^(-1/5)                    otherwise
// sd uses the (n - 1) divisor (0 when n == 1); quartiles interpolate linearly
// at positions p * (n - 1) of the sorted sample.
double silverman_bandwidth(std::span<const double> sample);

// Linear-interpolation quantile of an ascending sample.
double sorted_quantile(std::span<const double> sorted, double p);

// One-dimensional Gaussian KDE. Immutable once fitted.
class KdeModel {
 public:
  static KdeModel fit(std::span<const double> sample);
  // Fixed bandwidth instead of the rule of thumb.
  static KdeModel with_bandwidth(std::span<const double> sample, double bandwidth);

  const std::vector<double>& sample() const { return sample_; }
  double bandwidth() const { return bandwidth_; }
  bool evaluable() const { return bandwidth_ > 0.0; }

  double evaluate(double z) const;

 private:
  KdeModel(std::vector<double> sorted, double h) : sample_(std::move(sorted)), bandwidth_(h) {}

  std::vector<double> sample_;
  double bandwidth_ = 0.0;
};

struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

// Strict local extrema of a sampled curve. Interior plateaus are collapsed to
// their first index; boundary points count only when strictly above/below
// their single neighbour.
Extrema find_extrema(std::span<const double> densities);

struct DensityGrid {
  std::vector<double> points;
  std::vector<double> densities;
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;

  std::size_t mode_count() const { return maxima.size(); }
  double max_density() const;
};

inline constexpr std::size_t kMinGridPoints = 16;
inline constexpr std::size_t kDefaultGridPoints = 512;

// Evaluates the model at `grid_points` equally spaced abscissae spanning
// [lo, hi] inclusive and locates the extrema. Parallel over grid points.
DensityGrid evaluate_grid(const KdeModel& model, double lo, double hi,
                          std::size_t grid_points);

// Single-threaded reference; produces bit-identical grids.
DensityGrid evaluate_grid_serial(const KdeModel& model, double lo, double hi,
                                 std::size_t grid_points);

}  // namespace octree::kde
