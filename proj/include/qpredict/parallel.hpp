#pragma once

#include <cstddef>
#include <functional>

namespace qpredict {

/// Worker threads for internal parallel loops: QPREDICT_THREADS when set to a
/// positive integer, otherwise the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(begin, end) over consecutive chunks of [0, n). Chunk boundaries are
/// fixed by `chunk` alone, so results written per index do not depend on the
/// number of workers.
void parallel_for_chunks(std::size_t n, std::size_t chunk, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace qpredict
