#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expanse/geometry.hpp"

namespace expanse {

constexpr double kStallSpeed = 1e-14;

/// A point plus a flow-time offset; the partner sample is phi_offset(x).
struct SameOrbitSample {
    Vec x;
    double offset = 0.0;
};

/// Sampling metadata used by the property testers: regular starting
/// points and point pairs of known orbit relation.
struct SamplePlan {
    std::vector<Vec> regular_points;
    std::vector<std::array<Vec, 2>> distinct_orbit_pairs;
    std::vector<SameOrbitSample> same_orbit;
    double default_horizon = 20.0;
    double max_speed_hint = 1.0;
};

/// A vector field on a space plus the analytic metadata the tests treat
/// as ground truth.
struct FlowInstance {
    std::string name;
    Space space;
    VectorField field;
    std::function<Vec(const Vec&, double)> analytic_orbit;  // empty if none
    std::vector<Vec> fixed_points_truth;
    bool every_point_fixed = false;
    std::function<std::optional<double>(const Vec&)> period_at;  // empty if unknown
    std::function<double(const Vec&)> radial_coordinate;         // empty if none
    std::string notes;
    SamplePlan plan;
};

struct IntegrateOptions {
    double dt_init = 1e-3;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.1;
    double sample_dt = 0.0;  // 0: emit adaptive step nodes
    long max_steps = 5'000'000;
};

/// A time-stamped sampled trajectory. Times are strictly increasing and
/// velocities are recomputed from the field at the stored points.
struct OrbitSegment {
    std::string flow_id;
    Space space;
    std::vector<double> times;
    std::vector<Vec> points;
    std::vector<Vec> velocities;
    bool stalled = false;        // step underflow at a near-fixed point
    bool exited_domain = false;  // trajectory left a bounded region

    int size() const { return static_cast<int>(times.size()); }

    /// Cubic Hermite interpolation between stored samples.
    Vec interpolate(double t) const;
};

/// Adaptive Dormand-Prince 5(4) with per-step projection onto the space.
/// Backward spans (t1 < t0) integrate the negated field; samples are
/// always returned in increasing time order.
OrbitSegment integrate_orbit(const FlowInstance& flow, const Vec& x0, double t0,
                             double t1, const IntegrateOptions& opts = {});

/// Dense evaluation of the flow map: analytic orbit when available,
/// otherwise direct integration.
Vec orbit_point(const FlowInstance& flow, const Vec& x0, double t,
                const IntegrateOptions& opts = {});

/// Worker-local dense-output cache: repeated queries along one orbit
/// integrate out from the nearest cached node.
class OrbitEvaluator {
  public:
    OrbitEvaluator(const FlowInstance& flow, const Vec& x0, IntegrateOptions opts = {});
    Vec at(double t);

  private:
    const FlowInstance& flow_;
    Vec x0_;
    IntegrateOptions opts_;
    std::vector<std::pair<double, Vec>> nodes_;  // sorted by time
};

/// Max pairwise distance over samples i..j. Exact up to 512 samples,
/// then stride subsampling with full-resolution refinement near the
/// maximizing pair.
double segment_diameter(const OrbitSegment& seg, int i, int j);

struct FixedPointInfo {
    Vec location;
    Mat tangential_jacobian;
    SpectrumSummary spec;
    bool hyperbolic = false;
    bool jacobian_invertible = false;
    bool isolated_estimate = false;
    double isolation_radius = 0.0;
};

struct FixedPointOptions {
    double seed_speed_ceiling = 1e-3;
    // When the mesh is too coarse for any point to undercut the absolute
    // ceiling, seed from the slowest sampled points instead (up to this cap).
    double seed_fallback_cap = 0.05;
    double newton_tol = 1e-12;
    double merge_radius = 1e-6;
    double shell_radius = 0.1;
    double isolation_horizon = 1e3;
    int max_iterations = 200;
    double hyperbolic_tol = 1e-8;
    double invertible_tol = 1e-8;
};

struct FixedPointScan {
    std::vector<FixedPointInfo> points;
    bool whole_space_fixed = false;
    std::vector<std::string> log;  // dropped candidates etc.

    std::vector<Vec> locations() const {
        std::vector<Vec> v;
        v.reserve(points.size());
        for (const auto& p : points) v.push_back(p.location);
        return v;
    }
};

/// Seed candidates where the speed is locally minimal, refine by damped
/// (Levenberg-style) Newton, merge duplicates, classify via the spectrum
/// of the tangential Jacobian.
FixedPointScan find_fixed_points(const FlowInstance& flow, int mesh_resolution,
                                 const FixedPointOptions& opts = {});

/// First return time of x0 to within tol, with velocity alignment.
std::optional<double> detect_period(const FlowInstance& flow, const Vec& x0,
                                    double t_max, double tol = 1e-8);

/// Min over the samples of the full-orbit diameter estimate: one period
/// for periodic orbits, [-horizon, horizon] otherwise. Returns nullopt
/// when the minimum drops below 1e-6 (no positive bound at scale).
std::optional<double> beta0_estimate(const FlowInstance& flow,
                                     std::span<const Vec> orbit_samples,
                                     double horizon);

/// inf over regular mesh points of dist(phi_T(x), x).
struct XiScan {
    double xi = 0.0;
    Vec argmin;
    bool any_regular = false;
};
XiScan xi_scan(const FlowInstance& flow, double T, std::span<const Vec> mesh,
               double regular_floor = 1e-6);
double xi_estimate(const FlowInstance& flow, double T, std::span<const Vec> mesh,
                   double regular_floor = 1e-6);
double xi_estimate_serial(const FlowInstance& flow, double T, std::span<const Vec> mesh,
                          double regular_floor = 1e-6);

}  // namespace expanse
