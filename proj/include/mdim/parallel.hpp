// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace mdim {

/// Process-wide default worker count (0 = hardware concurrency).
void set_default_threads(int n);
int default_threads();

/// Runs fn(i) for i in [0, n) on a pool of threads. Work items must write
/// only to their own slot; the first exception is rethrown after joining.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace mdim
