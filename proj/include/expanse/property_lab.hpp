#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "expanse/flow_engine.hpp"
#include "expanse/matcher.hpp"

namespace expanse {

enum class Verdict { HoldsAtScale, Violated, Inconclusive };

const char* verdict_name(Verdict v);

/// Outcome of one property check. A holds_at_scale verdict means "no
/// counterexample at the declared sampling resolution and horizon"; every
/// parameter that shaped the scan is recorded in `parameters`, and every
/// violated verdict carries a witness that re-checks from scratch.
struct PropertyVerdict {
    std::string property;
    Verdict verdict = Verdict::Inconclusive;
    nlohmann::ordered_json witness;
    nlohmann::ordered_json parameters;
};

// ---------------------------------------------------------------------------
// Curvature and curve geometry
// ---------------------------------------------------------------------------

/// Curvature of the trajectory through p as a curve in ambient space:
/// sqrt(|J X|^2 |X|^2 - <J X, X>^2) / |X|^3 with J the field Jacobian.
/// Throws NearFixedPointError when |X(p)| <= 1e-10.
double curvature(const VectorField& field, const Vec& p);

/// Osculating-circle curvature from three nearby points of the orbit
/// through p (used as the independent cross-check of the formula).
double osculating_curvature(const FlowInstance& flow, const Vec& p, double tau);

/// Two facts about unit-speed curves: at an interior farthest point s from
/// the start, |acc(s)| * dist(start, s) >= 1; and when |acc| <= 1/R with
/// diameter < R, the diameter equals the endpoint distance. Samples must
/// be uniformly spaced at dt with speed within 1e-3 of 1.
PropertyVerdict docarmo_check(std::span<const Vec> samples, double dt, double R,
                              double tol = 1e-4);

// ---------------------------------------------------------------------------
// Speed bounds near fixed points
// ---------------------------------------------------------------------------

struct SpeedBounds {
    double B = 0.0;  // max |X| / dist(.,fix)
    double C = 0.0;  // max dist(.,fix) / |X|
    Vec arg_B, arg_C;
    bool c_diverged = false;  // C grows >10x when the mesh spacing shrinks 10x
    double c_coarse = 0.0, c_fine = 0.0;
    int mesh_coarse = 0, mesh_fine = 0;
};

/// Empirical two-sided speed/distance bounds over a mesh, with the
/// refinement-based divergence detector. Throws ConstantsUndefinedError
/// when fix is empty.
SpeedBounds constants_BC(const FlowInstance& flow, std::span<const Vec> fix,
                         int mesh_target);

struct CurvatureBound {
    double A = 0.0;   // sup kappa * dist(.,fix)
    double A1 = 0.0;  // sup |dX| (spectral norm)
    double a1c = 0.0; // A1 * C cross-check bound
    Vec arg_A;
};

CurvatureBound constant_A(const FlowInstance& flow, std::span<const Vec> fix,
                          int mesh_target, double exclusion = 1e-4, double C = 0.0);

struct DeltaStarResult {
    double value = 0.0;
    bool via_curvature_only = false;  // no fixed points: 1/sup(kappa)
    double term_r2_half = 0.0;
    double term_speed_bound = 0.0;   // 1/(B(A+1))
    double term_min_inv_kappa = 0.0; // min 1/kappa on dist >= r2/2
    double B = 0.0, A = 0.0;
};

/// Arc-diameter cap for the efficiency scan. Runs the fixed-point,
/// speed-bound and curvature-bound pipeline; throws
/// PipelineUnavailableError when the C bound diverges under refinement.
DeltaStarResult delta_star(const FlowInstance& flow, int mesh_target, double r2);

// ---------------------------------------------------------------------------
// Efficiency
// ---------------------------------------------------------------------------

struct EfficiencyParams {
    double delta_star = 1.0;
    double delta = 0.3;         // must stay below delta_star
    double sample_step = 1e-3;
    double horizon = 0.0;       // 0: two periods if periodic, else plan default
};

/// Scans orbit arcs [t,u] whose endpoints are delta*|X|-close and whose
/// diameter stays below delta_star; violated when such an arc leaves the
/// ball B(phi_t(x), delta*|X(phi_t(x))|).
PropertyVerdict efficiency_scan(const FlowInstance& flow, std::span<const Vec> starts,
                                const EfficiencyParams& params);

// ---------------------------------------------------------------------------
// Separating / KH
// ---------------------------------------------------------------------------

/// sup over the synchronized time grid (forward and backward) of
/// dist(phi_t(x), phi_t(y)).
double separating_margin(const FlowInstance& flow, const Vec& x, const Vec& y,
                         double horizon, double time_step = 1e-2);

/// Margins over the registered distinct-orbit pairs; violated when some
/// pair never separates beyond delta_sep within the horizon.
PropertyVerdict separating_scan(const FlowInstance& flow, double horizon,
                                double delta_sep, double time_step = 1e-2);

/// Separating + open fixed-point set classifier.
PropertyVerdict kh_classify(const FlowInstance& flow,
                            const PropertyVerdict& separating_verdict,
                            const FixedPointScan& fix_scan);

// ---------------------------------------------------------------------------
// Rescaled-threshold scans
// ---------------------------------------------------------------------------

/// First exit time from B(x, delta*|X(x)|); violated if it reaches
/// 3*delta. Inconclusive when the integration stalls inside the ball.
PropertyVerdict ball_time_scan(const FlowInstance& flow, const Vec& x, double delta);

/// sup over the synchronized grid of dist(phi_t(x), phi_t(y)) / |X(phi_t(x))|
/// (identity time correspondence; the matcher owns the optimized version).
double rescaled_sup_ratio(const FlowInstance& flow, const Vec& x, const Vec& y,
                          double horizon, double time_step = 1e-2);

/// Growth of the sup ratio between two horizons for the registered pairs:
/// bounded small ratios are a rescaling-expansivity counterexample at scale.
PropertyVerdict rescaled_ratio_check(const FlowInstance& flow, double horizon_short,
                                     double horizon_long, double time_step = 1e-2,
                                     double growth_floor = 2.0,
                                     double small_ratio = 0.5);

struct SpeedProfileRow {
    double dist_to_fix = 0.0;
    double speed = 0.0;
    double ratio = 0.0;
};

struct SpeedProfile {
    std::vector<SpeedProfileRow> rows;  // ordered by decreasing distance
    bool ratio_decreasing = false;
    bool ratio_constant = false;
};

/// Speed along a path approaching a fixed point; the ratio column divides
/// by the flow's radial coordinate when one is registered, else by the
/// distance to the fixed-point set.
SpeedProfile speed_profile(const FlowInstance& flow, std::span<const Vec> path,
                           std::span<const Vec> fix);

PropertyVerdict speed_profile_check(const FlowInstance& flow, int mesh_target);

// ---------------------------------------------------------------------------
// Orbit-matching evidence and the consistency flag
// ---------------------------------------------------------------------------

/// Hunts for near-misses: distinct-orbit pairs with a small two-sided
/// uniform match delta. Also reports the delta->beta rows for the
/// registered same-orbit pairs. Positive evidence (holds) means no
/// distinct pair matched below the threshold.
PropertyVerdict k_star_evidence(const FlowInstance& flow, double horizon,
                                double sample_dt, double near_miss_delta = 0.15);

/// Same hunt under the rescaled threshold; violated when a distinct pair
/// stays rescaled-matched below the threshold.
PropertyVerdict rescaled_near_miss(const FlowInstance& flow, double horizon,
                                   double sample_dt, double near_miss_delta = 0.05);

/// Forbidden conjunction: positive matching evidence + efficiency +
/// rescaled near-miss. Consistency requires this to stay false.
bool forbidden_conjunction(const PropertyVerdict& kstar,
                           const PropertyVerdict& efficiency,
                           const PropertyVerdict& rescaled);

/// Re-evaluates the defining inequality of a violated verdict at its
/// recorded witness, from scratch.
bool recheck_witness(const FlowInstance& flow, const PropertyVerdict& v);

nlohmann::ordered_json vec_json(const Vec& v);
Vec vec_from_json(const nlohmann::ordered_json& j);

}  // namespace expanse
