#pragma once

#include <cstddef>
#include <functional>

namespace paidreg {

/// Runs fn(i) for i in [0, count) on a pool of worker threads. threads == 0
/// uses the hardware concurrency.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace paidreg
