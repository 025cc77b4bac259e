#pragma once

#include <functional>
#include <vector>

namespace mldl::jobs {

/// Runs the jobs on `workers` threads (0 = hardware concurrency). Each job
/// owns its outputs; the first exception, if any, is rethrown after all
/// workers finish.
void run_parallel(const std::vector<std::function<void()>>& work, int workers = 0);

}  // namespace mldl::jobs
