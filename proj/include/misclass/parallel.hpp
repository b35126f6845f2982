#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace misclass {

// Worker cap: MISCLASS_PREV_THREADS if set and positive, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_limit();

// Runs task(i) for i in [0, count). Tasks must write results by index so
// that the outcome does not depend on scheduling. The first exception
// thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)> &task,
                  std::size_t max_workers = 0);

// Derives an independent 64-bit seed for stream `stream` of a run seeded
// with `seed` (splitmix64 finaliser over both inputs).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace misclass
