#ifndef EDGEKIT_PARALLEL_HPP
#define EDGEKIT_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace edgekit {

/// Runs fn(i) for i in [0, n) across up to n_threads workers. Work is
/// handed out by atomic counter; callers keep determinism by writing each
/// result into slot i of a pre-sized buffer and reducing sequentially
/// afterwards. The first exception thrown by any worker is rethrown after
/// all workers join. n_threads <= 1 runs inline.
void parallel_for(size_t n, size_t n_threads, const std::function<void(size_t)>& fn);

}  // namespace edgekit

#endif
