#pragma once

// Thin shims over OpenMP so the library builds (serially) without it.
// Parallel loops must write to disjoint slots; any reduction that has to be
// bitwise reproducible across thread counts is done serially afterwards.

#ifdef _OPENMP
#include <omp.h>
#define MIRTLINK_STRINGIFY_(x) #x
#define MIRTLINK_PRAGMA_OMP(x) _Pragma(MIRTLINK_STRINGIFY_(omp x))
#else
#define MIRTLINK_PRAGMA_OMP(x)
#endif

namespace mirtlink {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace mirtlink
