#pragma once

#include <cstddef>
#include <functional>

namespace basinlab {

/// `requested` workers (0 = hardware concurrency), capped by
/// BASINLAB_THREADS when that is set to a positive integer.
unsigned resolve_workers(unsigned requested);
unsigned default_workers();

/// Runs body(i) for every i in [0, count) on up to `workers` threads. Items
/// are claimed dynamically; callers write results into slot i so the outcome
/// does not depend on scheduling. The first exception thrown by a body is
/// rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace basinlab
