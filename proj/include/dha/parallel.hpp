#pragma once

#include <functional>

namespace dha {

// Worker count: DHA_FORGE_THREADS env var when set, hardware concurrency
// otherwise, never below 1.
int thread_count();

// Static range split across the pool; body(begin, end) per chunk. Each index
// is processed by exactly one worker, so results written to disjoint slots are
// identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace dha
