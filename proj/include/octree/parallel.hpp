#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace octree::parallel {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Restores the previous OpenMP thread count on scope exit.
class ScopedThreads {
 public:
  explicit ScopedThreads(int threads) : previous_(max_threads()) {
#ifdef _OPENMP
    omp_set_num_threads(threads < 1 ? 1 : threads);
#else
    (void)threads;
#endif
  }
  ~ScopedThreads() {
#ifdef _OPENMP
    omp_set_num_threads(previous_);
#endif
  }
  ScopedThreads(const ScopedThreads&) = delete;
  ScopedThreads& operator=(const ScopedThreads&) = delete;

 private:
  int previous_;
};

}  // namespace octree::parallel
