#pragma once

#include <atomic>
#include <cstddef>
#include <functional>

namespace addwav {

/// Worker threads for replication loops: $ADDWAV_WORKERS if set, else the
/// hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on a pool of worker_count() threads.
/// Results must be written to per-index slots; completion order is unspecified.
/// When `stop` is non-null and becomes true, remaining indices are skipped.
/// The first exception thrown by a body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  const std::atomic<bool>* stop = nullptr);

}  // namespace addwav
