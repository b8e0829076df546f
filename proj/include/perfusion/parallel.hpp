#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace perfusion::par {

namespace detail {
inline int& thread_setting() {
    static int n = 0; // 0 = use all hardware threads
    return n;
}
} // namespace detail

inline void set_threads(int n) { detail::thread_setting() = n < 0 ? 0 : n; }

inline int threads() {
#ifdef _OPENMP
    const int n = detail::thread_setting();
    return n == 0 ? omp_get_max_threads() : n;
#else
    return 1;
#endif
}

/// Serial reference loop. Kept as the ground truth the parallel path is tested against.
template <class F>
void serial_for(std::int64_t n, F&& body) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

/// Data-parallel loop over disjoint output slots. Each index writes only its own
/// results, so the outcome is bit-identical to serial_for for any schedule.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef _OPENMP
    const int nt = threads();
    if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#endif
    serial_for(n, body);
}

} // namespace perfusion::par
