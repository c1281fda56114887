#pragma once

#include <cstddef>
#include <functional>

namespace nlfp {

/// Runs fn(0) ... fn(n - 1) on up to `workers` threads. Indices are claimed
/// dynamically; the first exception thrown is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Worker count from NLFP_WORKERS if set and positive, else `fallback`.
std::size_t worker_count(std::size_t fallback);

}  // namespace nlfp
