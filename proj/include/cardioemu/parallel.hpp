#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace cardioemu {

inline int hardware_workers() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(i) for i in [0, n). Work items must be independent and write their
// results into caller-owned slots indexed by i; any reduction then happens
// serially in index order, so results do not depend on the worker count.
// workers <= 1 takes the plain serial loop, which is the reference path the
// OpenMP one is tested against. Exceptions are captured per item and the
// lowest-index one is rethrown after the loop.
template <class Fn>
void for_each_index(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#if defined(_OPENMP)
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace cardioemu
