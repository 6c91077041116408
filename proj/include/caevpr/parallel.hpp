#pragma once

#include <cstddef>
#include <functional>

namespace caevpr {

// Worker count from CAEVPR_NUM_THREADS, else hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, count). Each index is handled by exactly one
// thread, so results written per index do not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace caevpr
