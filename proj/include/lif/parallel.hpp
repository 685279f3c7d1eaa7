#pragma once

#include <cstddef>
#include <functional>

namespace lif {

int hardware_threads();

// Runs fn(begin, end) over a static partition of [0, n) on `threads` workers.
// Callers own the output buffers and must write disjoint slots; combined with
// an ordered final reduction this keeps results independent of thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace lif
