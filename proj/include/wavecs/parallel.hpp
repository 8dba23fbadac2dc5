#pragma once

#include <cstddef>
#include <functional>

namespace wavecs {

/// Number of worker threads used by parallel_for. Reads WAVECS_THREADS once;
/// falls back to std::thread::hardware_concurrency().
unsigned worker_count();

/// Overrides the worker count for the rest of the process (0 restores the default).
void set_worker_count(unsigned n);

/// Runs body(i) for i in [begin, end), split into contiguous chunks across
/// worker threads. Exceptions thrown by body are rethrown on the caller
/// (the first one wins). Runs inline when only one worker is available.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace wavecs
