#include "homogl/parallel.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace homogl {

int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(1, chunk);
    const std::size_t nchunks = (n + chunk - 1) / chunk;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long c = 0; c < (long long)nchunks; ++c) {
        const std::size_t b = std::size_t(c) * chunk;
        body(b, std::min(n, b + chunk));
    }
}

void parallel_row_bands(std::size_t nrows, std::size_t band,
                        const std::function<void(std::size_t, std::size_t)>& body) {
    if (nrows == 0) return;
    band = std::max<std::size_t>(1, band);
    const std::size_t nbands = (nrows + band - 1) / band;
    for (int phase = 0; phase < 2; ++phase) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long c = phase; c < (long long)nbands; c += 2) {
            const std::size_t b = std::size_t(c) * band;
            body(b, std::min(nrows, b + band));
        }
    }
}

double parallel_sum(std::size_t n, std::size_t chunk,
                    const std::function<double(std::size_t, std::size_t)>& partial) {
    if (n == 0) return 0.0;
    chunk = std::max<std::size_t>(1, chunk);
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<double> parts(nchunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long c = 0; c < (long long)nchunks; ++c) {
        const std::size_t b = std::size_t(c) * chunk;
        parts[std::size_t(c)] = partial(b, std::min(n, b + chunk));
    }
    double s = 0.0;
    for (double p : parts) s += p;
    return s;
}

}  // namespace homogl
