#pragma once

#include <cstddef>
#include <functional>

namespace specexact {

// Worker count for parallel_for. 0 restores the default: SPECEXACT_THREADS
// when set, otherwise the hardware concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(i) for i in [0, count). Each index writes only its own outputs,
// so results do not depend on scheduling. Nested calls run serially. If any
// body throws, the exception of the smallest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace specexact
