#pragma once

#include <Eigen/Core>

#include <functional>

namespace nsf {

/// Worker count: NSF_THREADS if set, otherwise the hardware concurrency.
int thread_count();
/// Overrides NSF_THREADS for the current process (0 restores the default).
void set_thread_count(int n);

/// Runs body(i) for i in [begin, end) over static contiguous chunks.
/// Each index is processed exactly once, so results do not depend on the worker count.
void parallel_for(Eigen::Index begin, Eigen::Index end,
                  const std::function<void(Eigen::Index)>& body);

}  // namespace nsf
