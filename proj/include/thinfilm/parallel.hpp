#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace thinfilm {

// Worker cap: min(OpenMP max threads, THINFILM_THREADS). Read once per process.
int max_workers();

enum class Exec { serial, parallel };

// Runs f(b) for b in [0, n_batches). The parallel path and the serial
// reference path must produce identical results for any kernel built on this:
// each batch writes only its own slot and the caller folds slots in index
// order, so the schedule never shows up in the output.
template <class F>
void for_batches(std::int64_t n_batches, Exec exec, F&& f) {
#ifdef _OPENMP
  if (exec == Exec::parallel && max_workers() > 1 && n_batches > 1) {
    // Interleaved chunks balance triangular pair loops; the result does not
    // depend on the schedule because batches write disjoint slots.
#pragma omp parallel for schedule(static, 1) num_threads(max_workers())
    for (std::int64_t b = 0; b < n_batches; ++b) f(b);
    return;
  }
#endif
  for (std::int64_t b = 0; b < n_batches; ++b) f(b);
}

}  // namespace thinfilm
