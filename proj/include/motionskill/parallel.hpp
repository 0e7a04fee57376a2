#pragma once

#include <cstddef>
#include <functional>

namespace motionskill {

/// Worker cap used when a caller passes jobs == 0: MOTIONSKILL_JOBS if set,
/// otherwise the hardware concurrency.
std::size_t default_jobs();

/// Runs body(i) for i in [0, n) on at most `jobs` threads. Each index is
/// independent, so results never depend on scheduling. The first exception
/// thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace motionskill
