// SPDX-License-Identifier: MIT
#pragma once

#include <exception>
#include <vector>

#include "solwave/types.hpp"

namespace solwave {

// Deterministic parallel map: fn(i) may run on any thread, but results are
// stored by index and exceptions are rethrown in index order, so the output
// (including the failure mode) is independent of the schedule. `serial`
// forces the reference single-thread path.
template <class T, class F>
std::vector<T> parallel_map(int n, F&& fn, bool serial = false) {
  std::vector<T> out(static_cast<size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));

#ifdef SOLWAVE_HAVE_OPENMP
  if (!serial) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (int i = 0; i < n; ++i)
      if (errors[i]) std::rethrow_exception(errors[i]);
    return out;
  }
#else
  (void)serial;
#endif
  for (int i = 0; i < n; ++i) out[i] = fn(i);
  return out;
}

}  // namespace solwave
