#pragma once

#include <functional>
#include <span>

#include "expanse/geometry.hpp"
#include "expanse/vec.hpp"

namespace expanse::kernels {

// Data-parallel reductions over sample sets. Every kernel has a serial
// reference twin; the OpenMP variants must produce bit-identical results
// (ties broken toward the lowest index, independent of thread count).

struct Extremum {
    double value = 0.0;
    int index = -1;
};

/// max over points of f(p). Skip a point by returning -inf from f.
Extremum max_over(std::span<const Vec> pts, const std::function<double(const Vec&)>& f);
Extremum max_over_serial(std::span<const Vec> pts, const std::function<double(const Vec&)>& f);

/// min over points of f(p). Skip a point by returning +inf from f.
Extremum min_over(std::span<const Vec> pts, const std::function<double(const Vec&)>& f);
Extremum min_over_serial(std::span<const Vec> pts, const std::function<double(const Vec&)>& f);

struct PairExtremum {
    double value = 0.0;
    int i = -1;
    int j = -1;
};

/// Exact max pairwise space distance, O(n^2).
PairExtremum max_pairwise_distance(const Space& space, std::span<const Vec> pts);
PairExtremum max_pairwise_distance_serial(const Space& space, std::span<const Vec> pts);

}  // namespace expanse::kernels
