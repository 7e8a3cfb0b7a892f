#pragma once

#include <cstddef>
#include <functional>

namespace xrel {

/// Caps the worker count used by parallel_for. 0 selects hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Calls body(begin, end) over disjoint contiguous chunks of [0, n).
/// Callers write results into index-addressed storage and reduce serially,
/// which keeps every result independent of the thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace xrel
