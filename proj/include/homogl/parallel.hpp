#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace homogl {

/// Worker threads used by the grid kernels (1 when built without OpenMP).
int worker_count();

/// Runs body(begin, end) over [0, n) in contiguous chunks of the given size,
/// possibly in parallel. Chunks must be independent. Chunk boundaries depend
/// only on n and chunk, never on the thread count.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Two-phase band scheduler for cell loops that accumulate into nodes: cell row
/// band [b, e) writes node rows [b, e]. Even-indexed bands run (in parallel)
/// first, then odd-indexed bands, so no two concurrently running bands share a
/// node row. Deposit order at any node is a function of the band layout alone,
/// which keeps accumulation bitwise reproducible for any thread count.
void parallel_row_bands(std::size_t nrows, std::size_t band,
                        const std::function<void(std::size_t, std::size_t)>& body);

/// Deterministic parallel sum: per-chunk partials combined in chunk order.
double parallel_sum(std::size_t n, std::size_t chunk,
                    const std::function<double(std::size_t, std::size_t)>& partial);

}  // namespace homogl
