#pragma once

#include <cstddef>
#include <functional>

namespace hhr {

// 0 restores the default (HHR_THREADS if set, otherwise the runtime's choice).
void set_thread_count(int n);
int thread_count();

// Static partition of [0, n).  Results must not depend on the schedule:
// callers write into per-index slots and reduce afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hhr
