#pragma once

#include <cstddef>
#include <functional>

namespace ral {

/// Number of worker threads used by the candidate-scoring loops: hardware
/// concurrency capped by the RAL_THREADS environment variable (a value of 1
/// disables threading).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n), possibly across threads. Callers must write
/// results into per-index slots; the reduction order afterwards is up to
/// them, so outcomes do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace ral
