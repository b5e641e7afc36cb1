#pragma once

#include <cstddef>
#include <functional>

namespace ggd {

/// Worker count used by the row-parallel kernels. Defaults to 1.
void set_num_workers(std::size_t n);
std::size_t num_workers();

/// Splits [0, n) into contiguous chunks, one per worker. Each row is owned by
/// exactly one worker, so kernels built on this stay bitwise identical to the
/// sequential path regardless of the worker count.
void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace ggd
