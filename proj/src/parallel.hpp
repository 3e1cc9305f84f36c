#pragma once

#include <cstddef>
#include <functional>

namespace copulalab::detail {

/// Worker count from COPULA_LAB_THREADS (0 or unset = hardware concurrency).
unsigned thread_count();

/// Calls body(i) for i in [0, count). Each index is processed exactly once;
/// callers write results to slot i so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace copulalab::detail
