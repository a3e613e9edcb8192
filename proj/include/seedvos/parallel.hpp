#pragma once

#include <cstddef>
#include <functional>

namespace seedvos {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// default (hardware concurrency).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(i) for i in [0, n). If any call throws, the exception from the
/// lowest failing index is rethrown after all workers finish, so error
/// reporting does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace seedvos
