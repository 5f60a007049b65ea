#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdoh {

/// Number of worker threads available to parallel loops.
inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Resolves a user thread request: 0 means "all available".
inline int resolve_threads(int requested) {
  if (requested <= 0) return hardware_threads();
  return requested;
}

/// Runs fn(i) for i in [0, n). Iterations must be independent; results that
/// feed a reduction are written to per-index slots and merged serially by the
/// caller so that output does not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int t = resolve_threads(threads);
#ifdef _OPENMP
  if (t > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(t)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  (void)t;
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace sdoh
