#include "expanse/kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace expanse::kernels {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Combine keeping the better value; on exact ties keep the lower index so
// the result does not depend on the thread partition.
inline void take_max(Extremum& best, double v, int i) {
    if (best.index < 0 || v > best.value) {
        best = {v, i};
    } else if (v == best.value && i < best.index) {
        best.index = i;
    }
}

inline void take_min(Extremum& best, double v, int i) {
    if (best.index < 0 || v < best.value) {
        best = {v, i};
    } else if (v == best.value && i < best.index) {
        best.index = i;
    }
}

}  // namespace

Extremum max_over_serial(std::span<const Vec> pts,
                         const std::function<double(const Vec&)>& f) {
    Extremum best{kNegInf, -1};
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        const double v = f(pts[static_cast<std::size_t>(i)]);
        if (v == kNegInf) continue;
        take_max(best, v, i);
    }
    return best;
}

Extremum max_over(std::span<const Vec> pts, const std::function<double(const Vec&)>& f) {
    const int n = static_cast<int>(pts.size());
    Extremum best{kNegInf, -1};
    std::exception_ptr err;
#pragma omp parallel
    {
        Extremum local{kNegInf, -1};
#pragma omp for schedule(static) nowait
        for (int i = 0; i < n; ++i) {
            if (err) continue;
            try {
                const double v = f(pts[static_cast<std::size_t>(i)]);
                if (v != kNegInf) take_max(local, v, i);
            } catch (...) {
#pragma omp critical(expanse_kernel_err)
                if (!err) err = std::current_exception();
            }
        }
#pragma omp critical(expanse_kernel_max)
        {
            if (local.index >= 0) {
                if (best.index < 0 || local.value > best.value ||
                    (local.value == best.value && local.index < best.index)) {
                    best = local;
                }
            }
        }
    }
    if (err) std::rethrow_exception(err);
    return best;
}

Extremum min_over_serial(std::span<const Vec> pts,
                         const std::function<double(const Vec&)>& f) {
    Extremum best{kPosInf, -1};
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        const double v = f(pts[static_cast<std::size_t>(i)]);
        if (v == kPosInf) continue;
        take_min(best, v, i);
    }
    return best;
}

Extremum min_over(std::span<const Vec> pts, const std::function<double(const Vec&)>& f) {
    const int n = static_cast<int>(pts.size());
    Extremum best{kPosInf, -1};
    std::exception_ptr err;
#pragma omp parallel
    {
        Extremum local{kPosInf, -1};
#pragma omp for schedule(static) nowait
        for (int i = 0; i < n; ++i) {
            if (err) continue;
            try {
                const double v = f(pts[static_cast<std::size_t>(i)]);
                if (v != kPosInf) take_min(local, v, i);
            } catch (...) {
#pragma omp critical(expanse_kernel_err)
                if (!err) err = std::current_exception();
            }
        }
#pragma omp critical(expanse_kernel_min)
        {
            if (local.index >= 0) {
                if (best.index < 0 || local.value < best.value ||
                    (local.value == best.value && local.index < best.index)) {
                    best = local;
                }
            }
        }
    }
    if (err) std::rethrow_exception(err);
    return best;
}

PairExtremum max_pairwise_distance_serial(const Space& space, std::span<const Vec> pts) {
    PairExtremum best;
    const int n = static_cast<int>(pts.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = space.distance_unchecked(pts[static_cast<std::size_t>(i)],
                                                      pts[static_cast<std::size_t>(j)]);
            if (best.i < 0 || d > best.value) {
                best = {d, i, j};
            }
        }
    }
    if (best.i < 0 && n > 0) best = {0.0, 0, 0};
    return best;
}

PairExtremum max_pairwise_distance(const Space& space, std::span<const Vec> pts) {
    const int n = static_cast<int>(pts.size());
    if (n == 0) return {};
    PairExtremum best{0.0, 0, 0};
#pragma omp parallel
    {
        PairExtremum local{0.0, 0, 0};
        // interleave rows: the triangular loop is front-loaded
#pragma omp for schedule(static, 8) nowait
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double d = space.distance_unchecked(
                    pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
                if (d > local.value ||
                    (d == local.value && (i < local.i || (i == local.i && j < local.j)))) {
                    local = {d, i, j};
                }
            }
        }
#pragma omp critical(expanse_kernel_pair)
        {
            if (local.value > best.value ||
                (local.value == best.value &&
                 (local.i < best.i || (local.i == best.i && local.j < best.j)))) {
                best = local;
            }
        }
    }
    return best;
}

}  // namespace expanse::kernels
