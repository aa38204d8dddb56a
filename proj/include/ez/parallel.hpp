#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ez {

/// Worker count used when a caller passes 0.
inline int default_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs body(i) for i in [0, n) across `workers` OpenMP threads (0 = default).
/// Each index must write only to its own output slot. If iterations throw, the
/// exception from the lowest index is rethrown on the calling thread after the join.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
    if (workers <= 0) workers = default_workers();
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            std::invoke(body, static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (static_cast<std::size_t>(i) < first_index) {
                first_index = static_cast<std::size_t>(i);
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

/// Serial reference loop with the same contract as parallel_for.
template <typename Body>
void serial_for(std::size_t n, Body&& body) {
    for (std::size_t i = 0; i < n; ++i) std::invoke(body, i);
}

} // namespace ez
