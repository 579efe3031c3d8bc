#pragma once

#include <cstddef>
#include <functional>

namespace polynet {

// Worker cap from POLYNET_THREADS, else hardware concurrency (at least 1).
int worker_count();

// Runs body(chunk) for chunk in [0, chunks). Chunks are independent, so any
// result indexed by chunk is schedule-independent.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

}  // namespace polynet
