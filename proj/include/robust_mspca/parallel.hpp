#pragma once

#include <cstddef>
#include <functional>

namespace robust_mspca {

/// Worker count: hardware concurrency, capped by ROBUST_MSPCA_THREADS.
std::size_t worker_count();

/// Runs fn(0..n-1) across worker_count() threads. Each index runs exactly
/// once; the first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace robust_mspca
