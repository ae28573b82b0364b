#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "expanse/property_lab.hpp"

namespace expanse {

/// Length of a sampled curve in the metric <v,w>/|X|^2: per-segment
/// Euclidean length divided by the midpoint speed. Every sample (and
/// midpoint) must stay off the fixed-point set (|X| > 1e-10), else
/// MetricUndefinedError.
double rescaled_length(const VectorField& field, std::span<const Vec> samples);

/// Rescaled length of one straight segment, by dyadic midpoint quadrature
/// with a fixed atomic length: splitting a segment in half reproduces the
/// two halves' weights exactly, so nested grids give nested path systems.
double rescaled_segment_weight(const VectorField& field, const Vec& a, const Vec& b,
                               double atom_len = 1e-3);

/// Uniform planar vertex grid: (x0 + i*h, y0 + j*h).
struct GridSpec {
    double x0 = 0.0, y0 = 0.0, h = 0.0;
    int nx = 0, ny = 0;

    Vec vertex(int i, int j) const { return Vec(x0 + i * h, y0 + j * h); }

    /// Index of the vertex at p, if p sits on the grid within tol.
    std::optional<std::pair<int, int>> locate(const Vec& p, double tol = 1e-9) const;

    /// Grid that contains both p and q as exact vertices: p and q must
    /// share a grid line (here: equal y), `steps` subdivisions between
    /// them, `pad` extra cells on every side.
    static GridSpec containing(const Vec& p, const Vec& q, int steps, int pad);

    GridSpec refined() const {  // halve the spacing, same vertex span
        return {x0, y0, 0.5 * h, 2 * nx - 1, 2 * ny - 1};
    }
};

/// Shortest path between grid vertices on the 8-connected graph with
/// rescaled segment weights; vertices within `exclusion` of a fixed point
/// are removed. An upper bound for the rescaled distance, non-increasing
/// under grid refinement.
double rescaled_distance_mesh(const VectorField& field, const GridSpec& grid,
                              const Vec& p, const Vec& q, std::span<const Vec> fix,
                              double exclusion = 1e-3);

/// Pushforward-isometry test for the map (r, theta) -> e^r (cos theta,
/// sin theta) from the flat cylinder onto the punctured plane carrying the
/// metric rescaled by the rotation field (-y, x): random tangent vectors
/// must keep their norms to 1e-9.
PropertyVerdict cylinder_isometry_check(int sample_count, std::uint64_t seed);

}  // namespace expanse
