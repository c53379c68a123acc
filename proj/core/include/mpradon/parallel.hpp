#pragma once

#include <cstddef>
#include <functional>

namespace mpradon {

/// Worker count: min(hardware_concurrency, MPRADON_THREADS if set).
int thread_budget();

/// Runs body(i) for i in [0,n). Work is split into a fixed number of
/// chunks independent of the thread count, so any reduction done per
/// chunk and combined in chunk order is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mpradon
