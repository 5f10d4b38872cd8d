#pragma once

#include <cstdint>
#include <functional>

namespace mbnla {

/// Number of worker threads used by sharded loops. Defaults to the hardware
/// concurrency; override with the MBNLA_THREADS environment variable.
unsigned worker_count();

/// Runs fn(chunk_begin, chunk_end) over a partition of [begin, end) into
/// contiguous chunks, one per worker. Callers are responsible for writing to
/// disjoint output slices; determinism then follows from the counter-based
/// RNG contract. Exceptions from workers are rethrown on the calling thread.
void parallel_for_chunks(uint64_t begin, uint64_t end,
                         const std::function<void(uint64_t, uint64_t)>& fn);

}  // namespace mbnla
