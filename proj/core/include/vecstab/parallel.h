#pragma once

#include <functional>

namespace vecstab {

/// Worker count from VECSTAB_JOBS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int DefaultJobs();

/// Runs body(0..n-1) on up to `jobs` threads. Results must be written by
/// index so output does not depend on scheduling. If any call throws, the
/// exception of the lowest failing index is rethrown after all workers stop.
void ParallelFor(int n, int jobs, const std::function<void(int)>& body);

}  // namespace vecstab
