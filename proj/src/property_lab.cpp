#include "expanse/property_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "expanse/detail/stepper.hpp"
#include "expanse/kernels.hpp"

namespace expanse {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::HoldsAtScale: return "holds_at_scale";
        case Verdict::Violated: return "violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

nlohmann::ordered_json vec_json(const Vec& v) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (int i = 0; i < v.n; ++i) j.push_back(v[i]);
    return j;
}

Vec vec_from_json(const nlohmann::ordered_json& j) {
    Vec v;
    v.n = static_cast<int>(j.size());
    for (int i = 0; i < v.n; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

namespace {

double curvature_raw(const VectorField& field, const Vec& p, double floor) {
    const Vec v = field.value(p);
    const double s = v.norm();
    if (s <= floor) return -1.0;
    const Vec jv = jacobian(field, p).mul(v);
    const double a = jv.norm2() * v.norm2();
    const double b = jv.dot(v);
    const double num2 = a - b * b;
    return std::sqrt(std::max(0.0, num2)) / (s * s * s);
}

double dist_to_set(const Space& space, const Vec& p, std::span<const Vec> set) {
    double best = kInf;
    for (const Vec& q : set) best = std::min(best, space.distance_unchecked(p, q));
    return best;
}

Vec torus_unwrap(const Space& space, const Vec& anchor, const Vec& p) {
    if (space.kind() != SpaceKind::FlatTorus2) return p;
    Vec q = p;
    for (int i = 0; i < 2; ++i) {
        double d = q[i] - anchor[i];
        d -= std::round(d);
        q[i] = anchor[i] + d;
    }
    return q;
}

}  // namespace

double curvature(const VectorField& field, const Vec& p) {
    const double k = curvature_raw(field, p, 1e-10);
    if (k < 0.0) throw NearFixedPointError("curvature: |X| <= 1e-10 at " + p.str());
    return k;
}

double osculating_curvature(const FlowInstance& flow, const Vec& p, double tau) {
    const Vec a = torus_unwrap(flow.space, p, orbit_point(flow, p, -tau));
    const Vec c = torus_unwrap(flow.space, p, orbit_point(flow, p, tau));
    Vec u = p - a, w = c - a, z = c - p;
    if (u.n == 2) {
        u = Vec(u[0], u[1], 0.0);
        w = Vec(w[0], w[1], 0.0);
        z = Vec(z[0], z[1], 0.0);
    }
    const double area2 = cross3(u, w).norm();  // twice the triangle area
    const double denom = u.norm() * w.norm() * z.norm();
    if (denom == 0.0) return 0.0;
    return 2.0 * area2 / denom;  // kappa = 4 * area / (|ab| |bc| |ca|)
}

// ---------------------------------------------------------------------------
// Unit-speed curve facts
// ---------------------------------------------------------------------------

PropertyVerdict docarmo_check(std::span<const Vec> samples, double dt, double R,
                              double tol) {
    PropertyVerdict v;
    v.property = "docarmo";
    v.parameters = {{"dt", dt}, {"R", R}, {"tol", tol}, {"samples", samples.size()}};
    const int n = static_cast<int>(samples.size());
    if (n < 3) throw DomainError("docarmo_check: need at least 3 samples");
    for (int i = 0; i + 1 < n; ++i) {
        const double sp = euclid(samples[static_cast<std::size_t>(i + 1)],
                                 samples[static_cast<std::size_t>(i)]) /
                          dt;
        if (sp < 1.0 - 1e-3 || sp > 1.0 + 1e-3)
            throw DomainError("docarmo_check: samples are not unit speed (|dg|/dt = " +
                              std::to_string(sp) + ")");
    }

    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i + 1 < n; ++i) {
        const Vec dd = samples[static_cast<std::size_t>(i + 1)] -
                       samples[static_cast<std::size_t>(i)] * 2.0 +
                       samples[static_cast<std::size_t>(i - 1)];
        acc[static_cast<std::size_t>(i)] = dd.norm() / (dt * dt);
    }

    int s_max = 0;
    double d_max = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = euclid(samples[static_cast<std::size_t>(i)], samples[0]);
        if (d > d_max) {
            d_max = d;
            s_max = i;
        }
    }

    // Bullet 1: an interior farthest point forces |acc| * dist >= 1.
    const bool b1_applies = s_max > 0 && s_max < n - 1;
    if (b1_applies) {
        const double prod = acc[static_cast<std::size_t>(s_max)] * d_max;
        if (prod < 1.0 - tol) {
            v.verdict = Verdict::Violated;
            v.witness = {{"bullet", 1},
                         {"s_index", s_max},
                         {"acc", acc[static_cast<std::size_t>(s_max)]},
                         {"dist", d_max},
                         {"product", prod}};
            return v;
        }
    }

    // Bullet 2: curvature <= 1/R and diameter < R force the diameter to be
    // attained at the endpoints.
    double acc_max = 0.0;
    for (int i = 1; i + 1 < n; ++i)
        acc_max = std::max(acc_max, acc[static_cast<std::size_t>(i)]);
    const Space plane = Space::plane(samples[0].n);
    const double diam = kernels::max_pairwise_distance(plane, samples).value;
    const bool b2_applies = acc_max <= (1.0 + 10.0 * tol) / R && diam < R;
    if (b2_applies) {
        const double end_dist =
            euclid(samples[static_cast<std::size_t>(n - 1)], samples[0]);
        if (std::abs(diam - end_dist) > tol * std::max(diam, 1e-12)) {
            v.verdict = Verdict::Violated;
            v.witness = {{"bullet", 2},
                         {"diameter", diam},
                         {"endpoint_distance", end_dist},
                         {"acc_max", acc_max}};
            return v;
        }
    }

    v.verdict = Verdict::HoldsAtScale;
    v.witness = {{"bullet1_applicable", b1_applies},
                 {"bullet2_applicable", b2_applies},
                 {"diameter", diam}};
    return v;
}

// ---------------------------------------------------------------------------
// Speed bounds
// ---------------------------------------------------------------------------

namespace {

struct RatioPass {
    double B = 0.0, C = 0.0;
    Vec arg_B, arg_C;
    int count = 0;
};

RatioPass ratio_pass(const FlowInstance& flow, std::span<const Vec> fix, int target) {
    const auto mesh = mesh_points(flow.space, target);
    RatioPass r;
    r.count = static_cast<int>(mesh.size());

    auto b_fun = [&](const Vec& p) -> double {
        const double d = dist_to_set(flow.space, p, fix);
        if (d <= 0.0) return -kInf;
        return flow.field.value(p).norm() / d;
    };
    auto c_fun = [&](const Vec& p) -> double {
        const double s = flow.field.value(p).norm();
        if (s <= 0.0) return -kInf;
        const double d = dist_to_set(flow.space, p, fix);
        if (d <= 0.0) return -kInf;
        return d / s;
    };
    const auto b = kernels::max_over(mesh, b_fun);
    const auto c = kernels::max_over(mesh, c_fun);
    if (b.index >= 0) {
        r.B = b.value;
        r.arg_B = mesh[static_cast<std::size_t>(b.index)];
    }
    if (c.index >= 0) {
        r.C = c.value;
        r.arg_C = mesh[static_cast<std::size_t>(c.index)];
    }
    return r;
}

}  // namespace

SpeedBounds constants_BC(const FlowInstance& flow, std::span<const Vec> fix,
                         int mesh_target) {
    if (fix.empty())
        throw ConstantsUndefinedError(
            "constants_BC: the fixed-point set is empty; the bounds are undefined");
    const RatioPass coarse = ratio_pass(flow, fix, mesh_target);
    const RatioPass fine = ratio_pass(flow, fix, mesh_target * 100);  // spacing / 10

    SpeedBounds sb;
    sb.B = coarse.B;
    sb.C = coarse.C;
    sb.arg_B = coarse.arg_B;
    sb.arg_C = coarse.arg_C;
    sb.c_coarse = coarse.C;
    sb.c_fine = fine.C;
    sb.mesh_coarse = coarse.count;
    sb.mesh_fine = fine.count;
    sb.c_diverged = fine.C > 10.0 * coarse.C;
    return sb;
}

CurvatureBound constant_A(const FlowInstance& flow, std::span<const Vec> fix,
                          int mesh_target, double exclusion, double C) {
    if (fix.empty())
        throw ConstantsUndefinedError("constant_A: the fixed-point set is empty");
    const auto mesh = mesh_points(flow.space, mesh_target);

    auto a_fun = [&](const Vec& p) -> double {
        const double d = dist_to_set(flow.space, p, fix);
        if (d < exclusion) return -kInf;
        const double k = curvature_raw(flow.field, p, 1e-10);
        if (k < 0.0) return -kInf;
        return k * d;
    };
    auto a1_fun = [&](const Vec& p) -> double {
        if (dist_to_set(flow.space, p, fix) < exclusion) return -kInf;
        return jacobian(flow.field, p).op_norm();
    };

    CurvatureBound cb;
    const auto a = kernels::max_over(mesh, a_fun);
    const auto a1 = kernels::max_over(mesh, a1_fun);
    if (a.index >= 0) {
        cb.A = a.value;
        cb.arg_A = mesh[static_cast<std::size_t>(a.index)];
    }
    cb.A1 = a1.index >= 0 ? a1.value : 0.0;
    cb.a1c = C > 0.0 ? cb.A1 * C : kInf;
    return cb;
}

DeltaStarResult delta_star(const FlowInstance& flow, int mesh_target, double r2) {
    const FixedPointScan scan = find_fixed_points(flow, mesh_target);
    if (scan.whole_space_fixed)
        throw PipelineUnavailableError("delta_star: every point of the space is fixed");

    DeltaStarResult r;
    const auto mesh = mesh_points(flow.space, mesh_target);

    if (scan.points.empty()) {
        // No fixed points: bounded trajectory curvature alone caps the arcs.
        auto k_fun = [&](const Vec& p) { return curvature_raw(flow.field, p, 1e-10); };
        const auto k = kernels::max_over(mesh, k_fun);
        r.via_curvature_only = true;
        r.value = (k.index >= 0 && k.value > 0.0) ? 1.0 / k.value : kInf;
        r.term_min_inv_kappa = r.value;
        r.term_r2_half = kInf;
        r.term_speed_bound = kInf;
        return r;
    }

    for (const auto& fp : scan.points) {
        if (!fp.jacobian_invertible)
            throw PipelineUnavailableError(
                "delta_star: the linearization at the fixed point " +
                fp.location.str() + " is not invertible");
    }
    const auto fix = scan.locations();
    const SpeedBounds sb = constants_BC(flow, fix, mesh_target);
    if (sb.c_diverged) {
        std::ostringstream os;
        os << "delta_star: the distance/speed bound diverges under mesh refinement ("
           << sb.c_coarse << " -> " << sb.c_fine
           << "); the linearization at a fixed point is not invertible";
        throw PipelineUnavailableError(os.str());
    }
    const CurvatureBound ca = constant_A(flow, fix, mesh_target, 1e-4, sb.C);

    auto k_far = [&](const Vec& p) -> double {
        if (dist_to_set(flow.space, p, fix) < 0.5 * r2) return -kInf;
        return curvature_raw(flow.field, p, 1e-10);
    };
    const auto km = kernels::max_over(mesh, k_far);

    r.B = sb.B;
    r.A = ca.A;
    r.term_r2_half = 0.5 * r2;
    r.term_speed_bound = 1.0 / (sb.B * (ca.A + 1.0));
    r.term_min_inv_kappa = (km.index >= 0 && km.value > 0.0) ? 1.0 / km.value : kInf;
    r.value = std::min({r.term_r2_half, r.term_speed_bound, r.term_min_inv_kappa});
    return r;
}

// ---------------------------------------------------------------------------
// Efficiency scan
// ---------------------------------------------------------------------------

PropertyVerdict efficiency_scan(const FlowInstance& flow, std::span<const Vec> starts,
                                const EfficiencyParams& params) {
    if (!(params.delta > 0.0) || !(params.delta < params.delta_star))
        throw DomainError("efficiency_scan: need 0 < delta < delta_star");

    PropertyVerdict v;
    v.property = "efficiency";
    v.parameters = {{"delta", params.delta},
                    {"delta_star", params.delta_star},
                    {"sample_step", params.sample_step},
                    {"horizon", params.horizon},
                    {"starts", starts.size()}};

    struct Violation {
        bool found = false;
        int start = -1, i = -1, j = -1;
        double t = 0, u = 0, endpoint = 0, radius = 0, diam = 0, maxd = 0;
        Vec x, arc_point;
    };
    std::vector<Violation> found(starts.size());
    long arcs_checked = 0;
    int regular_starts = 0;

#pragma omp parallel for schedule(dynamic) reduction(+ : arcs_checked, regular_starts)
    for (int s = 0; s < static_cast<int>(starts.size()); ++s) {
        const Vec x = starts[static_cast<std::size_t>(s)];
        if (flow.field.value(flow.space.project(x)).norm() <= 1e-12) continue;
        ++regular_starts;

        double horizon = params.horizon;
        if (horizon <= 0.0) {
            std::optional<double> period;
            if (flow.period_at) period = flow.period_at(x);
            // periodic orbits get two revolutions; aperiodic scans cap the
            // window so slow tails stay tractable at the fixed time step
            horizon = period ? 2.0 * *period : std::min(flow.plan.default_horizon, 10.0);
        }
        IntegrateOptions o;
        o.sample_dt = params.sample_step;
        const OrbitSegment seg = integrate_orbit(flow, x, 0.0, horizon, o);
        const int N = seg.size();

        Violation& vio = found[static_cast<std::size_t>(s)];
        for (int i = 0; i < N && !vio.found; ++i) {
            const double vi = seg.velocities[static_cast<std::size_t>(i)].norm();
            if (vi <= 1e-12) continue;
            const double R = params.delta * vi;
            double maxd = 0.0;
            int argmax = -1;
            for (int j = i + 1; j < N; ++j) {
                const double dj = seg.space.distance_unchecked(
                    seg.points[static_cast<std::size_t>(j)],
                    seg.points[static_cast<std::size_t>(i)]);
                if (dj > maxd) {
                    maxd = dj;
                    argmax = j;
                }
                if (maxd > params.delta_star) break;  // diameter cap exceeded
                ++arcs_checked;
                if (dj < R && maxd > R) {
                    const double diam = segment_diameter(seg, i, j);
                    if (diam < params.delta_star) {
                        vio.found = true;
                        vio.start = s;
                        vio.i = i;
                        vio.j = j;
                        vio.t = seg.times[static_cast<std::size_t>(i)];
                        vio.u = seg.times[static_cast<std::size_t>(j)];
                        vio.endpoint = dj;
                        vio.radius = R;
                        vio.diam = diam;
                        vio.maxd = maxd;
                        vio.x = x;
                        vio.arc_point = seg.points[static_cast<std::size_t>(argmax)];
                        break;
                    }
                }
            }
        }
    }

    const Violation* first = nullptr;
    for (const auto& f : found)
        if (f.found && (!first || f.start < first->start)) first = &f;

    if (first) {
        v.verdict = Verdict::Violated;
        v.witness = {{"x", vec_json(first->x)},
                     {"t", first->t},
                     {"u", first->u},
                     {"arc_point", vec_json(first->arc_point)},
                     {"endpoint_distance", first->endpoint},
                     {"ball_radius", first->radius},
                     {"arc_diameter", first->diam},
                     {"max_distance_from_start", first->maxd}};
    } else if (regular_starts == 0) {
        v.verdict = Verdict::Inconclusive;
        v.witness = {{"reason", "no regular starting points"}};
    } else {
        v.verdict = Verdict::HoldsAtScale;
        v.witness = {{"arcs_checked", arcs_checked}};
    }
    return v;
}

// ---------------------------------------------------------------------------
// Separating / KH
// ---------------------------------------------------------------------------

namespace {

// Calls fn(t, x_t, y_t) on the synchronized grid, forward then backward,
// for as long as both orbits provide matching sample times.
void sync_scan(const FlowInstance& flow, const Vec& x, const Vec& y, double horizon,
               double step,
               const std::function<void(double, const Vec&, const Vec&)>& fn) {
    IntegrateOptions o;
    o.sample_dt = step;
    for (const double dir : {1.0, -1.0}) {
        const OrbitSegment sx = integrate_orbit(flow, x, 0.0, dir * horizon, o);
        const OrbitSegment sy = integrate_orbit(flow, y, 0.0, dir * horizon, o);
        const int nx = sx.size(), ny = sy.size();
        for (int k = 0; k < std::min(nx, ny); ++k) {
            const int ix = dir > 0 ? k : nx - 1 - k;
            const int iy = dir > 0 ? k : ny - 1 - k;
            const double tx = sx.times[static_cast<std::size_t>(ix)];
            const double ty = sy.times[static_cast<std::size_t>(iy)];
            if (std::abs(tx - ty) > 1e-9) break;  // one orbit truncated earlier
            if (dir < 0 && k == 0) continue;      // t = 0 already visited
            fn(tx, sx.points[static_cast<std::size_t>(ix)],
               sy.points[static_cast<std::size_t>(iy)]);
        }
    }
}

}  // namespace

double separating_margin(const FlowInstance& flow, const Vec& x, const Vec& y,
                         double horizon, double time_step) {
    flow.space.require_member(x);
    flow.space.require_member(y);
    double sup =
        flow.space.distance_unchecked(flow.space.project(x), flow.space.project(y));
    sync_scan(flow, x, y, horizon, time_step, [&](double, const Vec& px, const Vec& py) {
        sup = std::max(sup, flow.space.distance_unchecked(px, py));
    });
    return sup;
}

PropertyVerdict separating_scan(const FlowInstance& flow, double horizon,
                                double delta_sep, double time_step) {
    PropertyVerdict v;
    v.property = "separating";
    v.parameters = {{"horizon", horizon},
                    {"delta_sep", delta_sep},
                    {"time_step", time_step},
                    {"pairs", flow.plan.distinct_orbit_pairs.size()}};
    if (flow.plan.distinct_orbit_pairs.empty()) {
        v.verdict = Verdict::Inconclusive;
        v.witness = {{"reason", "no registered distinct-orbit pairs"}};
        return v;
    }
    double min_margin = kInf;
    std::size_t min_idx = 0;
    std::vector<double> margins;
    for (std::size_t i = 0; i < flow.plan.distinct_orbit_pairs.size(); ++i) {
        const auto& pr = flow.plan.distinct_orbit_pairs[i];
        const double m = separating_margin(flow, pr[0], pr[1], horizon, time_step);
        margins.push_back(m);
        if (m < min_margin) {
            min_margin = m;
            min_idx = i;
        }
    }
    const auto& worst = flow.plan.distinct_orbit_pairs[min_idx];
    if (min_margin < delta_sep) {
        v.verdict = Verdict::Violated;
        v.witness = {{"x", vec_json(worst[0])},
                     {"y", vec_json(worst[1])},
                     {"margin", min_margin},
                     {"horizon", horizon}};
    } else {
        v.verdict = Verdict::HoldsAtScale;
        v.witness = {{"min_margin", min_margin}, {"margins", margins}};
    }
    return v;
}

PropertyVerdict kh_classify(const FlowInstance& flow,
                            const PropertyVerdict& separating_verdict,
                            const FixedPointScan& fix_scan) {
    PropertyVerdict v;
    v.property = "kh";
    v.parameters = {{"separating_verdict", verdict_name(separating_verdict.verdict)},
                    {"fixed_points", fix_scan.points.size()},
                    {"whole_space_fixed", fix_scan.whole_space_fixed}};

    const bool fix_open = fix_scan.whole_space_fixed || fix_scan.points.empty();
    if (!fix_open) {
        // A finite non-empty fixed-point set is not open: regular points
        // accumulate at each fixed point. Record one nearby regular point.
        const Vec sigma = fix_scan.points.front().location;
        Vec nearby = sigma;
        double speed = 0.0;
        for (const double eps : {1e-3, 1e-2, 5e-2, 1e-1}) {
            Vec cand = sigma;
            cand[0] += eps;
            cand = flow.space.project(cand);
            if (!flow.space.contains(cand)) continue;
            speed = flow.field.value(cand).norm();
            if (speed > 1e-12) {
                nearby = cand;
                break;
            }
        }
        v.verdict = Verdict::Violated;
        v.witness = {{"reason", "fixed_point_set_not_open"},
                     {"sigma", vec_json(sigma)},
                     {"nearby_regular_point", vec_json(nearby)},
                     {"nearby_speed", speed}};
        return v;
    }

    if (separating_verdict.verdict == Verdict::HoldsAtScale) {
        v.verdict = Verdict::HoldsAtScale;
        v.witness = {{"fix_open", true}, {"separating", "holds_at_scale"}};
    } else if (separating_verdict.verdict == Verdict::Violated) {
        v.verdict = Verdict::Violated;
        v.witness = {{"reason", "not_separating"},
                     {"separating_witness", separating_verdict.witness}};
    } else {
        v.verdict = Verdict::Inconclusive;
        v.witness = {{"reason", "separating check inconclusive"}};
    }
    return v;
}

// ---------------------------------------------------------------------------
// Rescaled-threshold scans
// ---------------------------------------------------------------------------

PropertyVerdict ball_time_scan(const FlowInstance& flow, const Vec& x, double delta) {
    flow.space.require_member(x);
    const Vec x0 = flow.space.project(x);
    const double speed = flow.field.value(x0).norm();
    if (speed <= 1e-12) throw DomainError("ball_time_scan: x is not a regular point");
    const double R = delta * speed;
    const double horizon = std::max(6.0 * delta, 1.0);

    PropertyVerdict v;
    v.property = "ball-time";
    v.parameters = {{"x", vec_json(x0)},
                    {"delta", delta},
                    {"ball_radius", R},
                    {"horizon", horizon}};

    auto g = [&](const Vec& y) { return flow.field.value(y); };
    std::optional<detail::StepRecord> crossing;
    auto watch = [&](const detail::StepRecord& rec) {
        if (flow.space.distance_unchecked(rec.y1, x0) > R) {
            crossing = rec;
            return false;
        }
        return true;
    };
    IntegrateOptions o;
    const auto res = detail::dopri5_drive(flow.space, g, x0, horizon, o, watch);

    if (!crossing) {
        const double end_speed = flow.field.value(res.y_end).norm();
        if (res.stalled || end_speed < 1e-3 * speed) {
            // the orbit is sinking into a fixed point inside the ball
            v.verdict = Verdict::Inconclusive;
            v.witness = {{"reason", "integration stalled inside the ball"},
                         {"time_reached", res.tau_end},
                         {"end_speed", end_speed}};
            return v;
        }
        v.verdict = Verdict::Violated;  // still inside after the whole horizon
        v.witness = {{"exit_time", horizon},
                     {"exit_time_is_lower_bound", true},
                     {"bound", 3.0 * delta}};
        return v;
    }

    double lo = crossing->tau0, hi = crossing->tau1;
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec p = detail::hermite(*crossing, mid, flow.space);
        if (flow.space.distance_unchecked(p, x0) > R)
            hi = mid;
        else
            lo = mid;
    }
    const double exit_time = 0.5 * (lo + hi);
    v.verdict = exit_time < 3.0 * delta ? Verdict::HoldsAtScale : Verdict::Violated;
    v.witness = {{"exit_time", exit_time}, {"bound", 3.0 * delta}};
    return v;
}

double rescaled_sup_ratio(const FlowInstance& flow, const Vec& x, const Vec& y,
                          double horizon, double time_step) {
    flow.space.require_member(x);
    flow.space.require_member(y);
    if (flow.field.value(flow.space.project(x)).norm() <= 1e-12)
        throw DomainError("rescaled_sup_ratio: x is not a regular point");
    double sup = 0.0;
    sync_scan(flow, x, y, horizon, time_step, [&](double, const Vec& px, const Vec& py) {
        const double d = flow.space.distance_unchecked(px, py);
        if (d == 0.0) return;
        const double s = flow.field.value(px).norm();
        sup = std::max(sup, s > 0.0 ? d / s : kInf);
    });
    return sup;
}

PropertyVerdict rescaled_ratio_check(const FlowInstance& flow, double horizon_short,
                                     double horizon_long, double time_step,
                                     double growth_floor, double small_ratio) {
    PropertyVerdict v;
    v.property = "rescaled-ratio";
    v.parameters = {{"horizon_short", horizon_short},
                    {"horizon_long", horizon_long},
                    {"time_step", time_step},
                    {"growth_floor", growth_floor},
                    {"small_ratio", small_ratio}};
    if (flow.plan.distinct_orbit_pairs.empty()) {
        v.verdict = Verdict::Inconclusive;
        v.witness = {{"reason", "no registered distinct-orbit pairs"}};
        return v;
    }

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& pr : flow.plan.distinct_orbit_pairs) {
        double rs, rl;
        if (flow.field.value(flow.space.project(pr[0])).norm() <= 1e-12) {
            // fixed base point: the threshold degenerates to zero, so any
            // positive distance separates the pair immediately
            const double d = flow.space.distance(pr[0], pr[1]);
            if (d == 0.0) continue;
            rs = rl = kInf;
        } else {
            rs = rescaled_sup_ratio(flow, pr[0], pr[1], horizon_short, time_step);
            rl = rescaled_sup_ratio(flow, pr[0], pr[1], horizon_long, time_step);
        }
        const double growth = (std::isfinite(rs) && rs > 0.0) ? rl / rs : kInf;
        rows.push_back({{"x", vec_json(pr[0])},
                        {"y", vec_json(pr[1])},
                        {"ratio_short", rs},
                        {"ratio_long", std::isfinite(rl) ? rl : -1.0},
                        {"growth", std::isfinite(growth) ? growth : -1.0}});
        if (std::isfinite(rl) && rl < small_ratio && growth < growth_floor) {
            v.verdict = Verdict::Violated;
            v.witness = {{"x", vec_json(pr[0])},
                         {"y", vec_json(pr[1])},
                         {"ratio_short", rs},
                         {"ratio_long", rl},
                         {"growth", growth}};
            return v;
        }
    }
    v.verdict = rows.empty() ? Verdict::Inconclusive : Verdict::HoldsAtScale;
    v.witness = {{"pairs", rows}};
    return v;
}

// ---------------------------------------------------------------------------
// Speed profiles
// ---------------------------------------------------------------------------

SpeedProfile speed_profile(const FlowInstance& flow, std::span<const Vec> path,
                           std::span<const Vec> fix) {
    SpeedProfile sp;
    for (const Vec& p : path) {
        SpeedProfileRow row;
        row.dist_to_fix = dist_to_set(flow.space, p, fix);
        row.speed = flow.field.value(p).norm();
        const double denom =
            flow.radial_coordinate ? flow.radial_coordinate(p) : row.dist_to_fix;
        row.ratio = denom > 0.0 ? row.speed / denom : kInf;
        sp.rows.push_back(row);
    }
    std::sort(sp.rows.begin(), sp.rows.end(),
              [](const SpeedProfileRow& a, const SpeedProfileRow& b) {
                  return a.dist_to_fix > b.dist_to_fix;
              });
    sp.ratio_decreasing = sp.rows.size() >= 2;
    double rmin = kInf, rmax = 0.0;
    for (std::size_t i = 0; i < sp.rows.size(); ++i) {
        rmin = std::min(rmin, sp.rows[i].ratio);
        rmax = std::max(rmax, sp.rows[i].ratio);
        if (i > 0 && sp.rows[i].ratio > sp.rows[i - 1].ratio * (1.0 + 1e-9))
            sp.ratio_decreasing = false;
    }
    sp.ratio_constant = !sp.rows.empty() && rmax - rmin <= 1e-12 * std::max(rmax, 1e-300);
    return sp;
}

PropertyVerdict speed_profile_check(const FlowInstance& flow, int mesh_target) {
    PropertyVerdict v;
    v.property = "speed-profile";
    v.parameters = {{"mesh", mesh_target}};
    const FixedPointScan scan = find_fixed_points(flow, mesh_target);
    if (scan.whole_space_fixed || scan.points.empty()) {
        v.verdict = Verdict::Inconclusive;
        v.witness = {
            {"reason", scan.whole_space_fixed ? "every point fixed" : "no fixed points"}};
        return v;
    }
    const auto fix = scan.locations();
    const Vec sigma = fix.front();

    std::vector<Vec> path;
    for (const double d : {0.5, 0.05, 0.005}) {
        Vec cand = sigma;
        cand[0] += d;
        cand = flow.space.project(cand);
        if (flow.space.contains(cand) && flow.field.value(cand).norm() > 0.0)
            path.push_back(cand);
    }
    if (path.size() < 3) {
        v.verdict = Verdict::Inconclusive;
        v.witness = {{"reason", "could not build a regular path toward the fixed point"}};
        return v;
    }
    const SpeedProfile sp = speed_profile(flow, path, fix);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : sp.rows)
        rows.push_back({{"dist_to_fix", r.dist_to_fix},
                        {"speed", r.speed},
                        {"ratio", r.ratio}});
    v.verdict = Verdict::HoldsAtScale;
    v.witness = {{"rows", rows},
                 {"ratio_decreasing", sp.ratio_decreasing},
                 {"ratio_constant", sp.ratio_constant}};
    return v;
}

// ---------------------------------------------------------------------------
// Matching evidence and the consistency flag
// ---------------------------------------------------------------------------

PropertyVerdict k_star_evidence(const FlowInstance& flow, double horizon,
                                double sample_dt, double near_miss_delta) {
    PropertyVerdict v;
    v.property = "k-star-evidence";
    v.parameters = {{"horizon", horizon},
                    {"sample_dt", sample_dt},
                    {"near_miss_delta", near_miss_delta}};

    nlohmann::ordered_json beta_rows = nlohmann::ordered_json::array();
    for (const auto& so : flow.plan.same_orbit) {
        const Vec y = orbit_point(flow, so.x, so.offset);
        const MatchResult mr = min_match_delta_two_sided(flow, so.x, y, horizon,
                                                         sample_dt, MatchMode::Uniform);
        IntegrateOptions o;
        o.sample_dt = std::abs(so.offset) / 256.0;
        const OrbitSegment arc = integrate_orbit(flow, so.x, 0.0, so.offset, o);
        const double beta = arc.size() >= 2 ? segment_diameter(arc, 0, arc.size() - 1) : 0.0;
        beta_rows.push_back({{"x", vec_json(so.x)},
                             {"offset", so.offset},
                             {"delta", mr.min_delta},
                             {"beta", beta}});
    }

    if (flow.plan.distinct_orbit_pairs.empty()) {
        v.verdict = Verdict::Inconclusive;
        v.witness = {{"reason", "no registered distinct-orbit pairs"},
                     {"same_orbit_delta_beta", beta_rows}};
        return v;
    }

    double min_d = kInf;
    std::size_t min_idx = 0;
    for (std::size_t i = 0; i < flow.plan.distinct_orbit_pairs.size(); ++i) {
        const auto& pr = flow.plan.distinct_orbit_pairs[i];
        const MatchResult mr = min_match_delta_two_sided(flow, pr[0], pr[1], horizon,
                                                         sample_dt, MatchMode::Uniform);
        if (mr.min_delta < min_d) {
            min_d = mr.min_delta;
            min_idx = i;
        }
    }
    const auto& worst = flow.plan.distinct_orbit_pairs[min_idx];
    if (min_d <= near_miss_delta) {
        v.verdict = Verdict::Violated;  // a distinct-orbit near miss exists
        v.witness = {{"x", vec_json(worst[0])},
                     {"y", vec_json(worst[1])},
                     {"min_distinct_delta", min_d},
                     {"same_orbit_delta_beta", beta_rows}};
    } else {
        v.verdict = Verdict::HoldsAtScale;
        v.witness = {{"min_distinct_delta", min_d},
                     {"same_orbit_delta_beta", beta_rows}};
    }
    return v;
}

PropertyVerdict rescaled_near_miss(const FlowInstance& flow, double horizon,
                                   double sample_dt, double near_miss_delta) {
    PropertyVerdict v;
    v.property = "rescaled-near-miss";
    v.parameters = {{"horizon", horizon},
                    {"sample_dt", sample_dt},
                    {"near_miss_delta", near_miss_delta}};
    if (flow.plan.distinct_orbit_pairs.empty()) {
        v.verdict = Verdict::Inconclusive;
        v.witness = {{"reason", "no registered distinct-orbit pairs"}};
        return v;
    }
    double min_d = kInf;
    std::size_t min_idx = 0;
    for (std::size_t i = 0; i < flow.plan.distinct_orbit_pairs.size(); ++i) {
        const auto& pr = flow.plan.distinct_orbit_pairs[i];
        const MatchResult mr = min_match_delta_two_sided(flow, pr[0], pr[1], horizon,
                                                         sample_dt, MatchMode::Rescaled);
        const double d = mr.feasible ? mr.min_delta : kInf;
        if (d < min_d) {
            min_d = d;
            min_idx = i;
        }
    }
    const auto& worst = flow.plan.distinct_orbit_pairs[min_idx];
    if (min_d <= near_miss_delta) {
        v.verdict = Verdict::Violated;
        v.witness = {{"x", vec_json(worst[0])},
                     {"y", vec_json(worst[1])},
                     {"min_distinct_delta", min_d}};
    } else {
        v.verdict = Verdict::HoldsAtScale;
        v.witness = {{"min_distinct_delta", std::isfinite(min_d) ? min_d : -1.0},
                     {"all_pairs_infeasible", !std::isfinite(min_d)}};
    }
    return v;
}

bool forbidden_conjunction(const PropertyVerdict& kstar,
                           const PropertyVerdict& efficiency,
                           const PropertyVerdict& rescaled) {
    return kstar.verdict == Verdict::HoldsAtScale &&
           efficiency.verdict == Verdict::HoldsAtScale &&
           rescaled.verdict == Verdict::Violated;
}

// ---------------------------------------------------------------------------
// Witness re-checks
// ---------------------------------------------------------------------------

bool recheck_witness(const FlowInstance& flow, const PropertyVerdict& v) {
    if (v.verdict != Verdict::Violated) return false;
    const auto& w = v.witness;

    if (v.property == "efficiency") {
        const Vec x = vec_from_json(w.at("x"));
        const double t = w.at("t"), u = w.at("u");
        const double delta = v.parameters.at("delta");
        const double dstar = v.parameters.at("delta_star");
        const Vec pt = orbit_point(flow, x, t);
        const double R = delta * flow.field.value(pt).norm();
        IntegrateOptions o;
        o.sample_dt = std::max((u - t) / 4096.0, 1e-6);
        const OrbitSegment arc = integrate_orbit(flow, pt, 0.0, u - t, o);
        const int n = arc.size();
        const double endpoint =
            flow.space.distance_unchecked(arc.points.back(), arc.points.front());
        double maxd = 0.0;
        for (int k = 0; k < n; ++k)
            maxd = std::max(maxd,
                            flow.space.distance_unchecked(
                                arc.points[static_cast<std::size_t>(k)], arc.points.front()));
        const double diam = segment_diameter(arc, 0, n - 1);
        return endpoint < R && diam < dstar && maxd > R;
    }
    if (v.property == "separating") {
        const Vec x = vec_from_json(w.at("x")), y = vec_from_json(w.at("y"));
        const double horizon = w.at("horizon");
        const double delta_sep = v.parameters.at("delta_sep");
        const double step = v.parameters.at("time_step");
        return separating_margin(flow, x, y, horizon, step) < delta_sep;
    }
    if (v.property == "kh") {
        const std::string reason = w.at("reason");
        if (reason == "fixed_point_set_not_open") {
            const Vec sigma = vec_from_json(w.at("sigma"));
            const Vec nearby = vec_from_json(w.at("nearby_regular_point"));
            return flow.field.value(sigma).norm() <= 1e-9 &&
                   flow.field.value(nearby).norm() > 1e-12;
        }
        if (reason == "not_separating") {
            const auto& sw = w.at("separating_witness");
            const Vec x = vec_from_json(sw.at("x")), y = vec_from_json(sw.at("y"));
            const double horizon = sw.at("horizon");
            const double margin = sw.at("margin");
            const double m = separating_margin(flow, x, y, horizon, 1e-2);
            return m <= margin * (1.0 + 1e-6) + 1e-12;
        }
        return false;
    }
    if (v.property == "ball-time") {
        const Vec x = vec_from_json(v.parameters.at("x"));
        const double delta = v.parameters.at("delta");
        return ball_time_scan(flow, x, delta).verdict == Verdict::Violated;
    }
    if (v.property == "rescaled-ratio") {
        const Vec x = vec_from_json(w.at("x")), y = vec_from_json(w.at("y"));
        const double hs = v.parameters.at("horizon_short");
        const double hl = v.parameters.at("horizon_long");
        const double step = v.parameters.at("time_step");
        const double rl = rescaled_sup_ratio(flow, x, y, hl, step);
        const double rs = rescaled_sup_ratio(flow, x, y, hs, step);
        return std::isfinite(rl) && rl < v.parameters.at("small_ratio").get<double>() &&
               rl / rs < v.parameters.at("growth_floor").get<double>();
    }
    if (v.property == "k-star-evidence" || v.property == "rescaled-near-miss") {
        const Vec x = vec_from_json(w.at("x")), y = vec_from_json(w.at("y"));
        const double horizon = v.parameters.at("horizon");
        const double dt = v.parameters.at("sample_dt");
        const double thr = v.parameters.at("near_miss_delta");
        const MatchMode mode =
            v.property == "k-star-evidence" ? MatchMode::Uniform : MatchMode::Rescaled;
        const MatchResult mr = min_match_delta_two_sided(flow, x, y, horizon, dt, mode);
        return mr.feasible && mr.min_delta <= thr;
    }
    if (v.property == "beta0") {
        const Vec x = vec_from_json(w.at("sample"));
        const double horizon = v.parameters.at("horizon");
        const Vec one[] = {x};
        return !beta0_estimate(flow, one, horizon).has_value();
    }
    if (v.property == "xi") {
        const Vec x = vec_from_json(w.at("argmin"));
        const double T = v.parameters.at("T");
        const Vec end = orbit_point(flow, x, T);
        return flow.space.distance_unchecked(end, flow.space.project(x)) <
               v.parameters.at("xi_floor").get<double>();
    }
    return false;
}

}  // namespace expanse
