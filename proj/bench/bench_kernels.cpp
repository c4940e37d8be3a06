// Serial reference vs OpenMP kernels: density grid evaluation and tree fitting.
//
//   bench_kernels [repetitions]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "octree/eval.hpp"
#include "octree/kde.hpp"
#include "octree/parallel.hpp"
#include "octree/tree.hpp"

using namespace octree;

namespace {

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  const int threads = parallel::max_threads();
  std::printf("threads available: %d, best of %d runs\n\n", threads, reps);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::printf("%-28s %12s %12s %8s %s\n", "kernel", "serial [ms]", "omp [ms]", "speedup",
              "identical");
  for (std::size_t n : {1000, 10000, 100000}) {
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    const auto model = kde::KdeModel::fit(x);
    const double lo = model.sample().front(), hi = model.sample().back();
    kde::DensityGrid serial, par;
    const double ts = best_of(reps, [&] { serial = kde::evaluate_grid_serial(model, lo, hi, 4096); });
    const double tp = best_of(reps, [&] { par = kde::evaluate_grid(model, lo, hi, 4096); });
    char label[64];
    std::snprintf(label, sizeof label, "grid n=%zu g=4096", n);
    std::printf("%-28s %12.3f %12.3f %8.2f %s\n", label, ts * 1e3, tp * 1e3, ts / tp,
                serial.densities == par.densities ? "yes" : "NO");
  }

  const auto blobs = inject_uniform_outliers(eval::three_blobs(20000, RngSeed{2}), 0.05, RngSeed{3});
  OcTree one_thread = [&] {
    parallel::ScopedThreads scope(1);
    return fit(blobs, Hyperparams{});
  }();
  double t1 = 0.0;
  {
    parallel::ScopedThreads scope(1);
    t1 = best_of(reps, [&] { one_thread = fit(blobs, Hyperparams{}); });
  }
  OcTree many = one_thread;
  const double tn = best_of(reps, [&] { many = fit(blobs, Hyperparams{}); });
  std::printf("%-28s %12.3f %12.3f %8.2f %s\n", "fit 21000x2 blobs", t1 * 1e3, tn * 1e3,
              t1 / tn, one_thread.predict(blobs) == many.predict(blobs) ? "yes" : "NO");
  return 0;
}
