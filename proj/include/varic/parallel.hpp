#pragma once

#include <cstddef>
#include <functional>

namespace varic {

// Worker count: VARIC_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Calls body(begin, end) on disjoint contiguous chunks covering [0, count).
// Chunks run concurrently; each index is visited exactly once.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace varic
