#pragma once

#include <cstddef>
#include <functional>

namespace polymesh {

// Global worker count used by batch routines. Results never depend on it:
// work is split into index ranges and every index writes its own slot.
void set_worker_count(unsigned workers);
unsigned worker_count();

// Calls body(begin, end) on disjoint chunks of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 256);

}  // namespace polymesh
