#include "expanse/flow_engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "expanse/detail/stepper.hpp"
#include "expanse/kernels.hpp"

namespace expanse {

namespace detail {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

Vec torus_unwrap_towards(const Vec& anchor, const Vec& p) {
    Vec q = p;
    for (int i = 0; i < 2; ++i) {
        double d = q[i] - anchor[i];
        d -= std::round(d);
        q[i] = anchor[i] + d;
    }
    return q;
}

}  // namespace

Vec hermite(const StepRecord& rec, double tau, const Space& space) {
    const double h = rec.tau1 - rec.tau0;
    const double th = (tau - rec.tau0) / h;
    Vec y1 = rec.y1;
    if (space.kind() == SpaceKind::FlatTorus2) y1 = torus_unwrap_towards(rec.y0, y1);
    const double t2 = th * th, t3 = t2 * th;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + th;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    Vec r = rec.y0 * h00 + rec.f0 * (h10 * h) + y1 * h01 + rec.f1 * (h11 * h);
    return space.project(r);
}

DriveResult dopri5_drive(const Space& space, const std::function<Vec(const Vec&)>& g,
                         const Vec& y0, double span, const IntegrateOptions& opts,
                         const std::function<bool(const StepRecord&)>& on_step) {
    DriveResult res;
    res.y_end = space.project(y0);
    if (span <= 0.0) return res;

    const bool check_exit = space.kind() == SpaceKind::EuclideanRegion ||
                            space.kind() == SpaceKind::InvariantSubset;

    Vec y = res.y_end;
    double tau = 0.0;
    double h = std::min({opts.dt_init, opts.max_step, span});
    long steps = 0;

    while (tau < span) {
        if (++steps > opts.max_steps)
            throw NumericError("integrator exceeded max_steps budget");

        const Vec k1 = g(y);
        if (k1.norm() < kStallSpeed) {
            res.stalled = true;
            break;
        }
        h = std::min(h, span - tau);
        if (h < 1e-14 * std::max(1.0, tau)) {
            res.stalled = true;
            break;
        }

        const Vec k2 = g(y + k1 * (A21 * h));
        const Vec k3 = g(y + k1 * (A31 * h) + k2 * (A32 * h));
        const Vec k4 = g(y + k1 * (A41 * h) + k2 * (A42 * h) + k3 * (A43 * h));
        const Vec k5 = g(y + k1 * (A51 * h) + k2 * (A52 * h) + k3 * (A53 * h) + k4 * (A54 * h));
        const Vec k6 = g(y + k1 * (A61 * h) + k2 * (A62 * h) + k3 * (A63 * h) +
                         k4 * (A64 * h) + k5 * (A65 * h));
        const Vec y5 = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
        const Vec k7 = g(y5);
        const Vec errv =
            (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;

        double err = 0.0;
        for (int i = 0; i < y.n; ++i) {
            const double sc =
                opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double e = errv[i] / sc;
            err += e * e;
        }
        err = std::sqrt(err / y.n);

        if (err <= 1.0) {
            if (check_exit && !space.contains(y5, kMembershipTol)) {
                if (h <= 1e-13 * std::max(1.0, tau)) {
                    res.exited = true;
                    break;
                }
                h *= 0.5;
                continue;
            }
            StepRecord rec;
            rec.tau0 = tau;
            rec.tau1 = tau + h;
            rec.y0 = y;
            rec.y1 = space.project(y5);
            rec.f0 = k1;
            rec.f1 = g(rec.y1);
            tau += h;
            if (tau >= span - 1e-15 * std::max(1.0, span)) {
                tau = span;
                rec.tau1 = span;
            }
            y = rec.y1;
            res.tau_end = tau;
            res.y_end = y;
            const bool keep_going = on_step ? on_step(rec) : true;
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h = std::min(opts.max_step, h * std::clamp(grow, 0.2, 5.0));
            if (!keep_going) break;
        } else {
            const double shrink = 0.9 * std::pow(err, -0.2);
            h *= std::clamp(shrink, 0.1, 0.9);
        }
    }
    return res;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Orbit integration
// ---------------------------------------------------------------------------

OrbitSegment integrate_orbit(const FlowInstance& flow, const Vec& x0, double t0,
                             double t1, const IntegrateOptions& opts) {
    flow.space.require_member(x0);
    OrbitSegment seg;
    seg.flow_id = flow.name;
    seg.space = flow.space;

    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const Vec start = flow.space.project(x0);

    auto push = [&](double t, const Vec& p) {
        const Vec pp = flow.space.project(p);
        seg.times.push_back(t);
        seg.points.push_back(pp);
        seg.velocities.push_back(flow.field.value(pp));
    };
    push(t0, start);
    if (span == 0.0) return seg;

    auto g = [&](const Vec& y) {
        Vec v = flow.field.value(y);
        return dir < 0 ? v * -1.0 : v;
    };

    long next_grid = 1;
    auto on_step = [&](const detail::StepRecord& rec) {
        if (opts.sample_dt > 0.0) {
            while (true) {
                const double tg = next_grid * opts.sample_dt;
                if (tg > rec.tau1 + 1e-15 || tg > span + 1e-15) break;
                if (tg > rec.tau0) push(t0 + dir * tg, detail::hermite(rec, tg, flow.space));
                ++next_grid;
            }
        } else {
            push(t0 + dir * rec.tau1, rec.y1);
        }
        return true;
    };

    const auto res = detail::dopri5_drive(flow.space, g, start, span, opts, on_step);
    seg.stalled = res.stalled;
    seg.exited_domain = res.exited;

    if (!res.stalled && !res.exited && res.tau_end >= span) {
        if (std::abs(seg.times.back() - t1) > 1e-12 * std::max(1.0, std::abs(t1))) {
            push(t1, res.y_end);
        } else {
            seg.times.back() = t1;
        }
    }

    if (dir < 0) {
        std::reverse(seg.times.begin(), seg.times.end());
        std::reverse(seg.points.begin(), seg.points.end());
        std::reverse(seg.velocities.begin(), seg.velocities.end());
    }
    return seg;
}

Vec OrbitSegment::interpolate(double t) const {
    if (times.empty()) throw DomainError("interpolate: empty segment");
    const double lo = times.front(), hi = times.back();
    const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    if (t < lo - slack || t > hi + slack)
        throw DomainError("interpolate: time outside segment span");
    const double tc = std::clamp(t, lo, hi);
    const auto it = std::upper_bound(times.begin(), times.end(), tc);
    int k = static_cast<int>(it - times.begin()) - 1;
    k = std::clamp(k, 0, size() - 2);
    if (size() == 1) return points[0];

    detail::StepRecord rec;
    rec.tau0 = times[static_cast<std::size_t>(k)];
    rec.tau1 = times[static_cast<std::size_t>(k) + 1];
    rec.y0 = points[static_cast<std::size_t>(k)];
    rec.y1 = points[static_cast<std::size_t>(k) + 1];
    rec.f0 = velocities[static_cast<std::size_t>(k)];
    rec.f1 = velocities[static_cast<std::size_t>(k) + 1];
    return detail::hermite(rec, tc, space);
}

Vec orbit_point(const FlowInstance& flow, const Vec& x0, double t,
                const IntegrateOptions& opts) {
    if (t == 0.0) return x0;
    if (flow.analytic_orbit) return flow.analytic_orbit(x0, t);
    const OrbitSegment seg = integrate_orbit(flow, x0, 0.0, t, opts);
    return t >= 0.0 ? seg.points.back() : seg.points.front();
}

OrbitEvaluator::OrbitEvaluator(const FlowInstance& flow, const Vec& x0,
                               IntegrateOptions opts)
    : flow_(flow), x0_(x0), opts_(opts) {
    nodes_.emplace_back(0.0, flow.space.project(x0));
}

Vec OrbitEvaluator::at(double t) {
    if (flow_.analytic_orbit) return flow_.analytic_orbit(x0_, t);
    // nearest cached node by time
    auto cmp = [](const std::pair<double, Vec>& a, double t) { return a.first < t; };
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t, cmp);
    auto best = nodes_.begin();
    double bd = std::numeric_limits<double>::infinity();
    for (auto cand : {it, it == nodes_.begin() ? it : std::prev(it)}) {
        if (cand != nodes_.end() && std::abs(cand->first - t) < bd) {
            bd = std::abs(cand->first - t);
            best = cand;
        }
    }
    if (bd == 0.0) return best->second;

    const double base_t = best->first;
    const Vec base_p = best->second;
    const double dir = t >= base_t ? 1.0 : -1.0;
    auto g = [&](const Vec& y) {
        Vec v = flow_.field.value(y);
        return dir < 0 ? v * -1.0 : v;
    };
    const auto res =
        detail::dopri5_drive(flow_.space, g, base_p, std::abs(t - base_t), opts_, nullptr);
    const Vec y = res.y_end;
    auto ins = std::lower_bound(nodes_.begin(), nodes_.end(), t, cmp);
    nodes_.insert(ins, {t, y});
    return y;
}

// ---------------------------------------------------------------------------
// Diameters
// ---------------------------------------------------------------------------

double segment_diameter(const OrbitSegment& seg, int i, int j) {
    if (i < 0 || j >= seg.size() || i > j)
        throw DomainError("segment_diameter: invalid sample range");
    const int count = j - i + 1;
    const Vec* base = seg.points.data() + i;
    if (count <= 512) {
        return kernels::max_pairwise_distance(seg.space, std::span<const Vec>(base, count))
            .value;
    }
    const int stride = (count + 511) / 512;
    std::vector<Vec> coarse;
    std::vector<int> idx;
    for (int k = 0; k < count; k += stride) {
        coarse.push_back(base[k]);
        idx.push_back(k);
    }
    if (idx.back() != count - 1) {
        coarse.push_back(base[count - 1]);
        idx.push_back(count - 1);
    }
    const auto c = kernels::max_pairwise_distance(seg.space, coarse);
    // Full-resolution refinement around the coarse argmax pair.
    auto window = [&](int center) {
        std::vector<Vec> w;
        const int lo = std::max(0, center - stride), hi = std::min(count - 1, center + stride);
        for (int k = lo; k <= hi; ++k) w.push_back(base[k]);
        return w;
    };
    const auto wa = window(idx[static_cast<std::size_t>(c.i)]);
    const auto wb = window(idx[static_cast<std::size_t>(c.j)]);
    double best = c.value;
    for (const auto& p : wa)
        for (const auto& q : wb)
            best = std::max(best, seg.space.distance_unchecked(p, q));
    return best;
}

// ---------------------------------------------------------------------------
// Fixed points
// ---------------------------------------------------------------------------

namespace {

struct Chart {
    int k;                    // chart dimension
    std::array<Vec, 2> basis; // sphere tangent basis (unused otherwise)
};

Chart chart_at(const Space& space, const Vec& p) {
    if (space.kind() == SpaceKind::UnitSphere2) {
        const Vec e = std::abs(p[2]) < 0.9 ? Vec(0, 0, 1) : Vec(1, 0, 0);
        Vec e1 = cross3(e, p);
        e1 = e1 * (1.0 / e1.norm());
        const Vec e2 = cross3(p, e1);
        return {2, {e1, e2}};
    }
    return {space.dim(), {}};
}

Vec retract(const Space& space, const Vec& p, const Chart& ch, const Eigen::VectorXd& s) {
    if (space.kind() == SpaceKind::UnitSphere2) {
        return space.project(p + ch.basis[0] * s(0) + ch.basis[1] * s(1));
    }
    Vec q = p;
    for (int i = 0; i < ch.k; ++i) q[i] += s(i);
    if (space.kind() == SpaceKind::FlatTorus2) q = space.project(q);
    return q;
}

Eigen::VectorXd tangential_value(const VectorField& f, const Space& space, const Vec& p,
                                 const Chart& ch) {
    const Vec v = f.value(p);
    Eigen::VectorXd r(ch.k);
    if (space.kind() == SpaceKind::UnitSphere2) {
        r(0) = ch.basis[0].dot(v);
        r(1) = ch.basis[1].dot(v);
    } else {
        for (int i = 0; i < ch.k; ++i) r(i) = v[i];
    }
    return r;
}

Eigen::MatrixXd tangential_jacobian_eig(const VectorField& f, const Space& space,
                                        const Vec& p, const Chart& ch) {
    const Mat j = jacobian(f, p);
    Eigen::MatrixXd r(ch.k, ch.k);
    if (space.kind() == SpaceKind::UnitSphere2) {
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const Vec jeb = j.mul(ch.basis[static_cast<std::size_t>(b)]);
                r(a, b) = ch.basis[static_cast<std::size_t>(a)].dot(jeb);
            }
    } else {
        for (int a = 0; a < ch.k; ++a)
            for (int b = 0; b < ch.k; ++b) r(a, b) = j.at(a, b);
    }
    return r;
}

// Damped Gauss-Newton (Levenberg) descent on |X|^2. Quadratic near roots
// with invertible Jacobians, still convergent on the degenerate ones.
std::optional<Vec> newton_refine(const FlowInstance& flow, Vec p,
                                 const FixedPointOptions& opts, std::string* note) {
    double lambda = 1e-8;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const Chart ch = chart_at(flow.space, p);
        const Eigen::VectorXd f = tangential_value(flow.field, flow.space, p, ch);
        const double fn = f.norm();
        const Eigen::MatrixXd j = tangential_jacobian_eig(flow.field, flow.space, p, ch);

        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd jtf = j.transpose() * f;

        bool advanced = false;
        for (int damp = 0; damp < 60; ++damp) {
            Eigen::MatrixXd m = jtj;
            for (int d = 0; d < ch.k; ++d) m(d, d) += lambda;
            const Eigen::VectorXd s = m.ldlt().solve(-jtf);
            if (!s.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            const Vec trial = retract(flow.space, p, ch, s);
            const double trial_norm = flow.field.value(trial).norm();
            if (trial_norm < fn) {
                const double step = s.norm();
                p = trial;
                // no damping floor: degenerate roots need the step to keep
                // approaching the plain Gauss-Newton one
                lambda = std::max(lambda * 0.25, 1e-300);
                advanced = true;
                if (trial_norm <= opts.newton_tol && step <= 1e-13) return p;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e20) break;
        }
        if (!advanced) {
            if (fn <= opts.newton_tol) return p;
            if (note) *note = "stagnated with |X| = " + std::to_string(fn);
            return std::nullopt;
        }
    }
    if (flow.field.value(p).norm() <= opts.newton_tol) return p;
    if (note) *note = "iteration budget exhausted";
    return std::nullopt;
}

bool orbit_leaves_ball(const FlowInstance& flow, const Vec& start, const Vec& sigma,
                       double radius, double horizon) {
    for (const double dir : {1.0, -1.0}) {
        auto g = [&](const Vec& y) {
            Vec v = flow.field.value(y);
            return dir < 0 ? v * -1.0 : v;
        };
        bool out = false;
        IntegrateOptions o;
        o.rel_tol = 1e-8;
        o.abs_tol = 1e-10;
        o.max_step = 0.5;
        auto watch = [&](const detail::StepRecord& rec) {
            if (flow.space.distance_unchecked(rec.y1, sigma) > radius) {
                out = true;
                return false;
            }
            return true;
        };
        try {
            detail::dopri5_drive(flow.space, g, start, horizon, o, watch);
        } catch (const NumericError&) {
            // step budget exhausted inside the ball: treat as not leaving
        }
        if (out) return true;
    }
    return false;
}

}  // namespace

FixedPointScan find_fixed_points(const FlowInstance& flow, int mesh_resolution,
                                 const FixedPointOptions& opts) {
    FixedPointScan scan;
    const auto mesh = mesh_points(flow.space, mesh_resolution);
    const double spacing = mesh_spacing(flow.space, mesh_resolution);

    std::vector<double> speed(mesh.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(mesh.size()); ++i)
        speed[static_cast<std::size_t>(i)] =
            flow.field.value(mesh[static_cast<std::size_t>(i)]).norm();

    int zero_count = 0;
    for (const double s : speed)
        if (s <= 1e-12) ++zero_count;
    if (!mesh.empty() && zero_count > 0.99 * static_cast<double>(mesh.size())) {
        scan.whole_space_fixed = true;
        return scan;
    }

    // Seeds: slow points, one per cluster of radius 3*spacing, slowest first.
    double ceiling = opts.seed_speed_ceiling;
    const double min_speed = *std::min_element(speed.begin(), speed.end());
    if (min_speed >= ceiling && min_speed < opts.seed_fallback_cap)
        ceiling = std::min(4.0 * min_speed, opts.seed_fallback_cap);
    std::vector<int> order;
    for (int i = 0; i < static_cast<int>(mesh.size()); ++i)
        if (speed[static_cast<std::size_t>(i)] < ceiling) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = speed[static_cast<std::size_t>(a)], sb = speed[static_cast<std::size_t>(b)];
        if (sa != sb) return sa < sb;
        return a < b;
    });
    std::vector<Vec> seeds;
    for (const int i : order) {
        const Vec& p = mesh[static_cast<std::size_t>(i)];
        bool fresh = true;
        for (const Vec& s : seeds)
            if (flow.space.distance_unchecked(p, s) < 3.0 * spacing) {
                fresh = false;
                break;
            }
        if (fresh) seeds.push_back(p);
    }

    std::vector<Vec> roots;
    for (const Vec& seed : seeds) {
        std::string note;
        const auto root = newton_refine(flow, seed, opts, &note);
        if (!root) {
            scan.log.push_back("dropped candidate near " + seed.str() + ": " + note);
            continue;
        }
        bool dup = false;
        for (const Vec& r : roots)
            if (flow.space.distance_unchecked(*root, r) < opts.merge_radius) {
                dup = true;
                break;
            }
        if (!dup) roots.push_back(*root);
    }

    for (const Vec& sigma : roots) {
        FixedPointInfo info;
        info.location = sigma;
        const Chart ch = chart_at(flow.space, sigma);
        const Eigen::MatrixXd tj = tangential_jacobian_eig(flow.field, flow.space, sigma, ch);
        Mat m = Mat::zero(ch.k);
        for (int a = 0; a < ch.k; ++a)
            for (int b = 0; b < ch.k; ++b) m.at(a, b) = tj(a, b);
        info.tangential_jacobian = m;
        info.spec = spectrum(m);
        bool hyper = true;
        for (int e = 0; e < info.spec.n; ++e)
            if (std::abs(info.spec.eigenvalues[static_cast<std::size_t>(e)].real()) <=
                opts.hyperbolic_tol)
                hyper = false;
        info.hyperbolic = hyper;
        info.jacobian_invertible = info.spec.min_singular_value > opts.invertible_tol;

        // Isolation scan: orbits started on a half-radius shell must leave
        // the ball in at least one time direction.
        const double r = opts.shell_radius;
        bool all_leave = true;
        const int K = 16;
        for (int k = 0; k < K; ++k) {
            const double th = 2.0 * std::numbers::pi * k / K;
            Vec start;
            if (flow.space.kind() == SpaceKind::UnitSphere2) {
                start = flow.space.project(sigma + ch.basis[0] * (0.5 * r * std::cos(th)) +
                                           ch.basis[1] * (0.5 * r * std::sin(th)));
            } else {
                start = sigma + Vec(0.5 * r * std::cos(th), 0.5 * r * std::sin(th));
                start = flow.space.project(start);
                if (!flow.space.contains(start)) continue;
            }
            if (!orbit_leaves_ball(flow, start, sigma, r, opts.isolation_horizon)) {
                all_leave = false;
                break;
            }
        }
        info.isolated_estimate = all_leave;
        info.isolation_radius = r;
        scan.points.push_back(info);
    }

    std::sort(scan.points.begin(), scan.points.end(),
              [](const FixedPointInfo& a, const FixedPointInfo& b) {
                  for (int i = 0; i < a.location.n; ++i) {
                      if (a.location[i] != b.location[i]) return a.location[i] < b.location[i];
                  }
                  return false;
              });
    return scan;
}

// ---------------------------------------------------------------------------
// Periods, orbit diameters, displacement bounds
// ---------------------------------------------------------------------------

std::optional<double> detect_period(const FlowInstance& flow, const Vec& x0,
                                    double t_max, double tol) {
    flow.space.require_member(x0);
    const Vec v0 = flow.field.value(x0);
    if (v0.norm() < 1e-12) return std::nullopt;

    IntegrateOptions o;
    o.sample_dt = std::min(1e-2, t_max / 2048.0);
    const OrbitSegment seg = integrate_orbit(flow, x0, 0.0, t_max, o);
    if (seg.size() < 8) return std::nullopt;

    OrbitEvaluator eval(flow, x0);
    auto dist_at = [&](double t) { return flow.space.distance_unchecked(eval.at(t), x0); };

    double scale = 0.0;
    for (const Vec& p : seg.points) scale = std::max(scale, flow.space.distance_unchecked(p, x0));

    for (int k = 2; k + 1 < seg.size(); ++k) {
        const double d0 = flow.space.distance_unchecked(seg.points[static_cast<std::size_t>(k - 1)], x0);
        const double d1 = flow.space.distance_unchecked(seg.points[static_cast<std::size_t>(k)], x0);
        const double d2 = flow.space.distance_unchecked(seg.points[static_cast<std::size_t>(k + 1)], x0);
        if (!(d1 <= d0 && d1 <= d2 && d1 < 0.2 * scale)) continue;
        // golden-section refinement of the local minimum
        double a = seg.times[static_cast<std::size_t>(k - 1)], b = seg.times[static_cast<std::size_t>(k + 1)];
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = dist_at(c), fd = dist_at(d);
        for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = dist_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = dist_at(d);
            }
        }
        const double t_star = 0.5 * (a + b);
        if (dist_at(t_star) > tol) continue;
        const Vec v_ret = flow.field.value(eval.at(t_star));
        if (v0.dot(v_ret) <= 0.0) continue;
        return t_star;
    }
    return std::nullopt;
}

std::optional<double> beta0_estimate(const FlowInstance& flow,
                                     std::span<const Vec> orbit_samples,
                                     double horizon) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& x : orbit_samples) {
        if (flow.field.value(x).norm() < 1e-12) continue;
        std::optional<double> period;
        if (flow.period_at) period = flow.period_at(x);
        if (!period) period = detect_period(flow, x, std::min(horizon, 100.0));

        OrbitSegment seg;
        if (period) {
            IntegrateOptions o;
            o.sample_dt = *period / 2048.0;
            seg = integrate_orbit(flow, x, 0.0, *period, o);
        } else {
            IntegrateOptions o;
            o.sample_dt = horizon / 2048.0;
            const OrbitSegment fwd = integrate_orbit(flow, x, 0.0, horizon, o);
            const OrbitSegment bwd = integrate_orbit(flow, x, 0.0, -horizon, o);
            seg = bwd;
            seg.times.insert(seg.times.end(), fwd.times.begin() + 1, fwd.times.end());
            seg.points.insert(seg.points.end(), fwd.points.begin() + 1, fwd.points.end());
            seg.velocities.insert(seg.velocities.end(), fwd.velocities.begin() + 1,
                                  fwd.velocities.end());
        }
        if (seg.size() < 2) continue;
        best = std::min(best, segment_diameter(seg, 0, seg.size() - 1));
    }
    if (!std::isfinite(best)) return std::nullopt;
    if (best < 1e-6) return std::nullopt;
    return best;
}

namespace {

double displacement_after(const FlowInstance& flow, const Vec& p, double T) {
    auto g = [&](const Vec& y) { return flow.field.value(y); };
    IntegrateOptions o;
    o.rel_tol = 1e-9;
    o.abs_tol = 1e-11;
    const auto res = detail::dopri5_drive(flow.space, g, p, T, o, nullptr);
    if (res.exited) return std::numeric_limits<double>::infinity();
    return flow.space.distance_unchecked(res.y_end, p);
}

}  // namespace

XiScan xi_scan(const FlowInstance& flow, double T, std::span<const Vec> mesh,
               double regular_floor) {
    auto f = [&](const Vec& p) -> double {
        if (flow.field.value(p).norm() <= regular_floor)
            return std::numeric_limits<double>::infinity();
        return displacement_after(flow, p, T);
    };
    const auto r = kernels::min_over(mesh, f);
    XiScan s;
    if (r.index >= 0) {
        s.xi = r.value;
        s.argmin = mesh[static_cast<std::size_t>(r.index)];
        s.any_regular = true;
    }
    return s;
}

double xi_estimate(const FlowInstance& flow, double T, std::span<const Vec> mesh,
                   double regular_floor) {
    return xi_scan(flow, T, mesh, regular_floor).xi;
}

double xi_estimate_serial(const FlowInstance& flow, double T, std::span<const Vec> mesh,
                          double regular_floor) {
    auto f = [&](const Vec& p) -> double {
        if (flow.field.value(p).norm() <= regular_floor)
            return std::numeric_limits<double>::infinity();
        return displacement_after(flow, p, T);
    };
    const auto r = kernels::min_over_serial(mesh, f);
    return r.index < 0 ? 0.0 : r.value;
}

}  // namespace expanse
