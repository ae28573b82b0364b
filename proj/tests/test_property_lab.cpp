#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "expanse/flow_zoo.hpp"
#include "expanse/property_lab.hpp"

using namespace expanse;

namespace {
constexpr double kPi = std::numbers::pi;
std::mt19937_64 rng(90210u);

std::vector<Vec> circle_arc(const Vec& center, double R, double phi0, double span,
                            int n, double* dt_out) {
    // unit-speed parameterization: arclength s, angle phi0 + s/R
    const double L = R * span;
    const double dt = L / (n - 1);
    *dt_out = dt;
    std::vector<Vec> pts;
    for (int i = 0; i < n; ++i) {
        const double a = phi0 + (i * dt) / R;
        pts.emplace_back(center[0] + R * std::cos(a), center[1] + R * std::sin(a));
    }
    return pts;
}

std::vector<Vec> straight_segment(const Vec& a, const Vec& u, double len, int n,
                                  double* dt_out) {
    const double dt = len / (n - 1);
    *dt_out = dt;
    std::vector<Vec> pts;
    for (int i = 0; i < n; ++i) pts.push_back(a + u * (i * dt));
    return pts;
}
}  // namespace

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

TEST_CASE("curvature of straight, circular and radius-dependent orbits") {
    const auto& drift = zoo::get("constant_drift");
    CHECK(curvature(drift.field, Vec(0.3, -0.2)) == 0.0);
    CHECK(curvature(drift.field, Vec(-0.7, 0.1)) == 0.0);

    const auto& rot = zoo::get("rotation_unit");
    CHECK(curvature(rot.field, Vec(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(curvature(rot.field, Vec(0, 0.5)) == doctest::Approx(2.0).epsilon(1e-12));

    const auto& ann = zoo::get("annulus_periodic");
    for (const double r : {1.0, 1.5, 2.0}) {
        const double formula = curvature(ann.field, Vec(r, 0.0));
        const double oracle = osculating_curvature(ann, Vec(r, 0.0), 1e-3);
        CHECK(formula == doctest::Approx(1.0 / r).epsilon(1e-12));
        CHECK(std::abs(formula - oracle) <= 1e-4 * oracle);
    }

    CHECK_THROWS_AS(curvature(rot.field, Vec(0, 0)), NearFixedPointError);
}

TEST_CASE("curvature formula tracks the osculating-circle fit on every flow") {
    for (const auto& name : zoo::list()) {
        if (name == "zero_field") continue;  // no regular points
        const auto& f = zoo::get(name);
        int checked = 0;
        for (const Vec& base : f.plan.regular_points) {
            // walk a few points along the orbit to vary the geometry
            for (const double t : {0.0, 0.13, 0.29, 0.55, 0.8, 1.15, 1.6}) {
                Vec p;
                try {
                    p = orbit_point(f, base, t);
                } catch (const DomainError&) {
                    continue;
                }
                if (!f.space.contains(p) || f.field.value(p).norm() <= 1e-8) continue;
                const double kf = curvature(f.field, p);
                const double ko = osculating_curvature(f, p, 1e-3);
                CAPTURE(name);
                CHECK(std::abs(kf - ko) <= std::max(1e-4 * std::max(kf, ko), 1e-6));
                ++checked;
                if (checked >= 20) break;
            }
            if (checked >= 20) break;
        }
        CAPTURE(name);
        CHECK(checked >= 12);
    }
}

// ---------------------------------------------------------------------------
// Unit-speed curve facts
// ---------------------------------------------------------------------------

TEST_CASE("short circular arcs attain their diameter at the endpoints") {
    double dt = 0.0;
    const auto arc = circle_arc(Vec(0.4, -0.2), 1.3, 0.5, 0.9, 2000, &dt);
    const auto v = docarmo_check(arc, dt, 1.3);
    CHECK(v.verdict == Verdict::HoldsAtScale);
    const double chord = euclid(arc.back(), arc.front());
    CHECK(v.witness.at("diameter").get<double>() ==
          doctest::Approx(chord).epsilon(1e-12));
}

TEST_CASE("an arc past the half turn has an interior farthest point") {
    double dt = 0.0;
    const auto arc = circle_arc(Vec(0, 0), 1.0, 0.0, 1.5 * kPi, 6000, &dt);
    const auto v = docarmo_check(arc, dt, 1.0);
    CHECK(v.verdict == Verdict::HoldsAtScale);
    CHECK(v.witness.at("bullet1_applicable").get<bool>());
    // at the antipode: |acc| * dist = (1/R) * 2R = 2
}

TEST_CASE("straight segments satisfy both bullets for any larger R") {
    double dt = 0.0;
    const auto seg = straight_segment(Vec(0, 0), Vec(1, 0), 1.0, 1500, &dt);
    const auto v = docarmo_check(seg, dt, 2.0);
    CHECK(v.verdict == Verdict::HoldsAtScale);
    CHECK(v.witness.at("bullet2_applicable").get<bool>());
}

TEST_CASE("non-unit-speed samples are rejected") {
    std::vector<Vec> bad = {Vec(0, 0), Vec(0.5, 0), Vec(1.0, 0)};
    CHECK_THROWS_AS(docarmo_check(bad, 1.0, 1.0), DomainError);
}

TEST_CASE("random arcs and segments pass both bullets") {
    std::uniform_real_distribution<double> uR(0.5, 2.0);
    std::uniform_real_distribution<double> uspan(0.1, 1.9 * kPi);
    std::uniform_real_distribution<double> uphi(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> ulen(0.5, 2.0);
    for (int k = 0; k < 100; ++k) {
        double dt = 0.0;
        if (k % 2 == 0) {
            const double R = uR(rng);
            const auto arc = circle_arc(Vec(uphi(rng) - kPi, 0.1), R, uphi(rng),
                                        uspan(rng), 4000, &dt);
            CHECK(docarmo_check(arc, dt, R).verdict == Verdict::HoldsAtScale);
        } else {
            const double a = uphi(rng);
            const double len = ulen(rng);
            const auto seg = straight_segment(Vec(0.3, -0.4),
                                              Vec(std::cos(a), std::sin(a)), len, 2000, &dt);
            CHECK(docarmo_check(seg, dt, 1.5 * len).verdict == Verdict::HoldsAtScale);
        }
    }
}

// ---------------------------------------------------------------------------
// Speed bounds and the efficiency pipeline
// ---------------------------------------------------------------------------

TEST_CASE("speed bounds are exactly one for the linear saddle") {
    const auto& f = zoo::get("linear_saddle");
    const Vec origin[] = {Vec(0.0, 0.0)};
    const SpeedBounds sb = constants_BC(f, origin, 10000);
    CHECK(sb.B == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sb.C == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(sb.c_diverged);

    // the sandwich holds on every mesh point with the empirical constants
    const auto mesh = mesh_points(f.space, 10000);
    for (const Vec& p : mesh) {
        const double d = euclid(p, Vec(0, 0));
        const double s = f.field.value(p).norm();
        if (d == 0.0) continue;
        CHECK(s - (1.0 / sb.C) * d >= -1e-12);
        CHECK(sb.B * d - s >= -1e-12);
    }
}

TEST_CASE("speed bounds of the linear-speed sphere flow match the closed form") {
    const auto& f = zoo::get("sphere_ns");
    const SpeedBounds sb = constants_BC(f, f.fixed_points_truth, 5000);
    // |Y| / dist(.,poles) = sqrt((1+|z|)/2); compute the mesh extrema directly
    const auto mesh = mesh_points(f.space, 5000);
    double b_oracle = 0.0, c_oracle = 0.0;
    for (const Vec& p : mesh) {
        const double zz = std::abs(p[2]);
        b_oracle = std::max(b_oracle, std::sqrt((1.0 + zz) / 2.0));
        c_oracle = std::max(c_oracle, std::sqrt(2.0 / (1.0 + zz)));
    }
    CHECK(sb.B == doctest::Approx(b_oracle).epsilon(1e-9));
    CHECK(sb.C == doctest::Approx(c_oracle).epsilon(1e-9));
    CHECK(sb.C <= std::sqrt(2.0) + 1e-9);
    CHECK_FALSE(sb.c_diverged);
}

TEST_CASE("the divergence detector fires for the cubic sphere flow") {
    const auto& f = zoo::get("sphere_ns_cubic");
    const SpeedBounds sb = constants_BC(f, f.fixed_points_truth, 5000);
    CHECK(sb.c_diverged);
    CHECK(sb.c_fine > 10.0 * sb.c_coarse);

    const Vec none[0] = {};
    CHECK_THROWS_AS(constants_BC(f, std::span<const Vec>(none, 0), 1000),
                    ConstantsUndefinedError);
}

TEST_CASE("curvature-distance product: rotation and concentric circles") {
    const auto& rot = zoo::get("rotation_unit");
    const Vec origin[] = {Vec(0.0, 0.0)};
    const CurvatureBound cb = constant_A(rot, origin, 40000, 1e-4, 1.0);
    CHECK(cb.A == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cb.A <= cb.a1c + 1e-9);

    const auto& cc = zoo::get("concentric_circles");
    const CurvatureBound cc_b = constant_A(cc, cc.fixed_points_truth, 40000, 1e-4, 1.0);
    CHECK(cc_b.A == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("curvature-distance product is stable under refinement for the saddle") {
    // saddle restricted to an annular region away from the origin
    FlowInstance f = zoo::get("linear_saddle");
    f.space = Space::annulus(Vec(0, 0), 0.25, 1.0);
    const Vec origin[] = {Vec(0.0, 0.0)};
    const CurvatureBound a1 = constant_A(f, origin, 40000, 1e-4, 1.0);
    const CurvatureBound a2 = constant_A(f, origin, 160000, 1e-4, 1.0);
    CHECK(a1.A == doctest::Approx(1.0).epsilon(1e-2));  // sup of 2|xy|/r^2
    CHECK(std::abs(a1.A - a2.A) <= 1e-2);
    CHECK(a1.A <= a1.a1c + 1e-9);
}

TEST_CASE("arc-diameter caps from the pipeline") {
    const auto& saddle = zoo::get("linear_saddle");
    const DeltaStarResult ds = delta_star(saddle, 40000, 0.5);
    CHECK_FALSE(ds.via_curvature_only);
    CHECK(ds.term_r2_half == 0.25);
    CHECK(ds.value == 0.25);  // r2/2 is the binding term
    CHECK(ds.term_speed_bound >= 0.45);
    CHECK(ds.term_min_inv_kappa >= 0.25);

    const auto& ann = zoo::get("annulus_periodic");
    const DeltaStarResult da = delta_star(ann, 40000, 0.5);
    CHECK(da.via_curvature_only);
    CHECK(da.value == doctest::Approx(1.0).epsilon(0.03));

    CHECK_THROWS_AS(delta_star(zoo::get("sphere_ns_cubic"), 5000, 0.5),
                    PipelineUnavailableError);
    CHECK_THROWS_AS(delta_star(zoo::get("zero_field"), 2000, 0.5),
                    PipelineUnavailableError);
    // degenerate (rank-deficient) linearization at the torus singularity
    CHECK_THROWS_AS(delta_star(zoo::get("torus_irrational_singular"), 40000, 0.5),
                    PipelineUnavailableError);
}

// ---------------------------------------------------------------------------
// Efficiency scan
// ---------------------------------------------------------------------------

TEST_CASE("a full turn of a tiny circle escapes its rescaled ball") {
    const auto& cc = zoo::get("concentric_circles");
    const Vec start(std::exp(-3.0), 0.0);
    const Vec starts[] = {start};
    EfficiencyParams params;
    params.delta = 0.3;
    params.delta_star = 1.0;
    params.sample_step = 1e-3;
    const PropertyVerdict v = efficiency_scan(cc, starts, params);
    REQUIRE(v.verdict == Verdict::Violated);

    const double r = std::exp(-3.0);
    CHECK(v.witness.at("arc_diameter").get<double>() ==
          doctest::Approx(2.0 * r).epsilon(1e-3));
    CHECK(v.witness.at("ball_radius").get<double>() ==
          doctest::Approx(0.3 * r).epsilon(1e-6));
    CHECK(v.witness.at("max_distance_from_start").get<double>() >
          v.witness.at("ball_radius").get<double>());
    CHECK(recheck_witness(cc, v));
}

TEST_CASE("bounded-curvature flows pass the arc scan") {
    const auto& ann = zoo::get("annulus_periodic");
    EfficiencyParams params;
    params.delta = 0.3;
    params.delta_star = 1.0;
    params.sample_step = 1e-3;
    const PropertyVerdict v = efficiency_scan(ann, ann.plan.regular_points, params);
    CHECK(v.verdict == Verdict::HoldsAtScale);

    const auto& drift = zoo::get("constant_drift");
    EfficiencyParams dp;
    dp.delta = 1.0;
    dp.delta_star = 5.0;
    dp.sample_step = 1e-3;
    CHECK(efficiency_scan(drift, drift.plan.regular_points, dp).verdict ==
          Verdict::HoldsAtScale);

    EfficiencyParams bad;
    bad.delta = 2.0;
    bad.delta_star = 1.0;
    CHECK_THROWS_AS(efficiency_scan(ann, ann.plan.regular_points, bad), DomainError);
}

// ---------------------------------------------------------------------------
// Separating / KH
// ---------------------------------------------------------------------------

TEST_CASE("annulus margins reach their closed forms") {
    const auto& ann = zoo::get("annulus_periodic");
    // radii 1 and 2 anti-align when 3t = pi
    const double m = separating_margin(ann, Vec(1, 0), Vec(2, 0), kPi / 3.0 + 0.1);
    CHECK(m == doctest::Approx(3.0).epsilon(1e-3));

    const Vec y(std::cos(0.1), std::sin(0.1));
    const double ms = separating_margin(ann, Vec(1, 0), y, 5.0);
    CHECK(ms == doctest::Approx(2.0 * std::sin(0.05)).epsilon(1e-6));
}

TEST_CASE("separating scans across the registry") {
    CHECK(separating_scan(zoo::get("annulus_periodic"), 10.0, 0.05).verdict ==
          Verdict::HoldsAtScale);
    CHECK(separating_scan(zoo::get("torus_irrational_singular"), 20.0, 0.05).verdict ==
          Verdict::HoldsAtScale);

    const PropertyVerdict zf = separating_scan(zoo::get("zero_field"), 5.0, 0.05);
    CHECK(zf.verdict == Verdict::Violated);
    CHECK(recheck_witness(zoo::get("zero_field"), zf));

    const PropertyVerdict rot = separating_scan(zoo::get("rotation_unit"), 10.0, 0.05);
    CHECK(rot.verdict == Verdict::Violated);
    CHECK(recheck_witness(zoo::get("rotation_unit"), rot));

    CHECK(separating_scan(zoo::get("concentric_circles"), 10.0, 0.05).verdict ==
          Verdict::Violated);
}

TEST_CASE("separating plus open fixed-point set classification") {
    // annulus: no fixed points, separating at scale
    const auto& ann = zoo::get("annulus_periodic");
    const auto ann_fix = find_fixed_points(ann, 20000);
    const auto ann_sep = separating_scan(ann, 10.0, 0.05);
    const auto ann_kh = kh_classify(ann, ann_sep, ann_fix);
    CHECK(ann_kh.verdict == Verdict::HoldsAtScale);

    // torus: one fixed point, so the set is not open
    const auto& tor = zoo::get("torus_irrational_singular");
    const auto tor_fix = find_fixed_points(tor, 40000);
    const auto tor_sep = separating_scan(tor, 20.0, 0.05);
    const auto tor_kh = kh_classify(tor, tor_sep, tor_fix);
    CHECK(tor_kh.verdict == Verdict::Violated);
    CHECK(tor_kh.witness.at("reason").get<std::string>() == "fixed_point_set_not_open");
    CHECK(recheck_witness(tor, tor_kh));

    // zero field: fixed set is the whole space (open), but nothing separates
    const auto& zf = zoo::get("zero_field");
    const auto zf_fix = find_fixed_points(zf, 2000);
    const auto zf_sep = separating_scan(zf, 5.0, 0.05);
    const auto zf_kh = kh_classify(zf, zf_sep, zf_fix);
    CHECK(zf_kh.verdict == Verdict::Violated);
    CHECK(zf_kh.witness.at("reason").get<std::string>() == "not_separating");
    CHECK(recheck_witness(zf, zf_kh));
}

// ---------------------------------------------------------------------------
// Rescaled-threshold scans
// ---------------------------------------------------------------------------

TEST_CASE("first exits from rescaled balls stay below three delta") {
    const auto& rot = zoo::get("rotation_unit");
    const PropertyVerdict v1 = ball_time_scan(rot, Vec(1, 0), 0.1);
    CHECK(v1.verdict == Verdict::HoldsAtScale);
    // chord 2 sin(t/2) = 0.1  =>  t = 2 asin(0.05)
    CHECK(v1.witness.at("exit_time").get<double>() ==
          doctest::Approx(2.0 * std::asin(0.05)).epsilon(2e-4));

    const auto& drift = zoo::get("constant_drift");
    const PropertyVerdict v2 = ball_time_scan(drift, Vec(0, 0), 0.2);
    CHECK(v2.verdict == Verdict::HoldsAtScale);
    CHECK(v2.witness.at("exit_time").get<double>() == doctest::Approx(0.2).epsilon(1e-6));

    const auto& ann = zoo::get("annulus_periodic");
    const PropertyVerdict v3 = ball_time_scan(ann, Vec(2, 0), 0.05);
    CHECK(v3.verdict == Verdict::HoldsAtScale);
    // 4 sin(2t) = 0.05 * 8  =>  t = asin(0.1) / 2
    CHECK(v3.witness.at("exit_time").get<double>() ==
          doctest::Approx(std::asin(0.1) / 2.0).epsilon(2e-4));
}

TEST_CASE("orbits trapped in a large rescaled ball violate the exit bound") {
    const auto& rot = zoo::get("rotation_unit");
    // whole orbit diameter 0.2 < ball radius 3 * |X| = 0.3
    const PropertyVerdict v = ball_time_scan(rot, Vec(0.1, 0.0), 3.0);
    CHECK(v.verdict == Verdict::Violated);
    CHECK(recheck_witness(rot, v));

    const auto& saddle = zoo::get("linear_saddle");
    // start on the stable axis: the orbit sinks into the fixed point
    const PropertyVerdict s = ball_time_scan(saddle, Vec(0.0, 0.5), 1.5);
    CHECK(s.verdict == Verdict::Inconclusive);

    CHECK_THROWS_AS(ball_time_scan(rot, Vec(0, 0), 0.1), DomainError);
}

TEST_CASE("synchronized rescaled ratios: growth separates the two sphere flows") {
    const auto& X = zoo::get("sphere_ns_cubic");
    const Vec x(1, 0, 0), y(std::cos(0.5), std::sin(0.5), 0.0);
    const double r10 = rescaled_sup_ratio(X, x, y, 10.0);
    const double r100 = rescaled_sup_ratio(X, x, y, 100.0);
    CHECK(r10 == doctest::Approx(9.0908).epsilon(1e-3));
    CHECK(r100 == doctest::Approx(97.560).epsilon(1e-3));
    CHECK(r100 / r10 == doctest::Approx(10.7317).epsilon(1e-3));

    const auto& Y = zoo::get("sphere_ns");
    const double s10 = rescaled_sup_ratio(Y, x, y, 10.0);
    const double s100 = rescaled_sup_ratio(Y, x, y, 100.0);
    CHECK(s10 == doctest::Approx(2.0 * std::sin(0.25)).epsilon(1e-6));
    CHECK(std::abs(s100 - s10) / s10 < 0.2);

    CHECK(rescaled_sup_ratio(X, x, x, 5.0) == 0.0);
}

TEST_CASE("the ratio growth check classifies the sphere flows") {
    const PropertyVerdict vx = rescaled_ratio_check(zoo::get("sphere_ns_cubic"), 10, 100);
    CHECK(vx.verdict == Verdict::HoldsAtScale);
    const PropertyVerdict vy = rescaled_ratio_check(zoo::get("sphere_ns"), 10, 100);
    CHECK(vy.verdict == Verdict::Violated);
    CHECK(recheck_witness(zoo::get("sphere_ns"), vy));
    // zero field: the threshold degenerates to zero, nothing stays close
    CHECK(rescaled_ratio_check(zoo::get("zero_field"), 5, 10).verdict ==
          Verdict::HoldsAtScale);
}

// ---------------------------------------------------------------------------
// Speed profiles
// ---------------------------------------------------------------------------

TEST_CASE("speed profiles along meridians") {
    const auto& X = zoo::get("sphere_ns_cubic");
    std::vector<Vec> path;
    for (const double rho : {0.5, 0.05, 0.005})
        path.emplace_back(rho, 0.0, std::sqrt(1.0 - rho * rho));
    const SpeedProfile px = speed_profile(X, path, X.fixed_points_truth);
    REQUIRE(px.rows.size() == 3);
    CHECK(px.rows[0].ratio == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(px.rows[1].ratio == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(px.rows[2].ratio == doctest::Approx(2.5e-5).epsilon(1e-12));
    CHECK(px.ratio_decreasing);
    CHECK_FALSE(px.ratio_constant);

    const auto& Y = zoo::get("sphere_ns");
    const SpeedProfile py = speed_profile(Y, path, Y.fixed_points_truth);
    for (const auto& r : py.rows) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(py.ratio_constant);

    const auto& saddle = zoo::get("linear_saddle");
    std::vector<Vec> axis = {Vec(0.4, 0.0), Vec(0.1, 0.0), Vec(0.01, 0.0)};
    const SpeedProfile ps = speed_profile(saddle, axis, saddle.fixed_points_truth);
    for (const auto& r : ps.rows) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Matching evidence
// ---------------------------------------------------------------------------

TEST_CASE("near-miss hunts under the uniform threshold") {
    const PropertyVerdict ann = k_star_evidence(zoo::get("annulus_periodic"), 20, 0.05);
    CHECK(ann.verdict == Verdict::HoldsAtScale);
    CHECK(ann.witness.at("min_distinct_delta").get<double>() >= 0.25 - 1e-9);
    CHECK(ann.witness.at("same_orbit_delta_beta").size() == 2);

    const PropertyVerdict rot = k_star_evidence(zoo::get("rotation_unit"), 20, 0.05);
    CHECK(rot.verdict == Verdict::Violated);
    CHECK(recheck_witness(zoo::get("rotation_unit"), rot));
}

TEST_CASE("near-miss hunts under the rescaled threshold") {
    const PropertyVerdict y = rescaled_near_miss(zoo::get("sphere_ns"), 30, 0.05);
    CHECK(y.verdict == Verdict::Violated);
    CHECK(y.witness.at("min_distinct_delta").get<double>() <= 0.05);
    CHECK(recheck_witness(zoo::get("sphere_ns"), y));

    const PropertyVerdict x = rescaled_near_miss(zoo::get("sphere_ns_cubic"), 30, 0.05);
    CHECK(x.verdict == Verdict::HoldsAtScale);

    // the zero field's threshold collapses to zero: no pair is matchable
    const PropertyVerdict z = rescaled_near_miss(zoo::get("zero_field"), 5, 0.05);
    CHECK(z.verdict == Verdict::HoldsAtScale);
    CHECK(z.witness.at("all_pairs_infeasible").get<bool>());
}

TEST_CASE("a certified arc cap implies a clean efficiency scan") {
    // wherever the pipeline legitimately applies (bounded speed ratios,
    // invertible linearizations, certified isolation), scanning below the
    // derived cap must find nothing
    for (const auto& name : zoo::list()) {
        const auto& f = zoo::get(name);
        const FixedPointScan scan = find_fixed_points(f, 10000);
        if (scan.whole_space_fixed) continue;
        bool isolated = true;
        for (const auto& fp : scan.points) isolated &= fp.isolated_estimate;
        if (!isolated) continue;  // hypothesis fails (e.g. rigid rotation)
        DeltaStarResult ds;
        try {
            ds = delta_star(f, 10000, 0.5);
        } catch (const PipelineUnavailableError&) {
            continue;
        }
        if (!std::isfinite(ds.value)) continue;  // straight flows cap nothing
        EfficiencyParams params;
        params.delta_star = ds.value;
        params.delta = 0.5 * ds.value;
        params.sample_step = 2e-3;
        const PropertyVerdict v = efficiency_scan(f, f.plan.regular_points, params);
        CAPTURE(name);
        CHECK(v.verdict == Verdict::HoldsAtScale);
    }
}

TEST_CASE("the forbidden conjunction never fires across the registry") {
    for (const auto& name : zoo::list()) {
        const auto& f = zoo::get(name);
        const double horizon = std::min(f.plan.default_horizon, 30.0);
        const PropertyVerdict kstar = k_star_evidence(f, horizon, 0.05);
        const PropertyVerdict resc = rescaled_near_miss(f, horizon, 0.05);
        PropertyVerdict eff;
        eff.property = "efficiency";
        try {
            const DeltaStarResult ds = delta_star(f, 10000, 0.5);
            EfficiencyParams params;
            params.delta_star = std::min(ds.value, 10.0);
            params.delta = 0.3 * params.delta_star;
            params.sample_step = 2e-3;
            eff = efficiency_scan(f, f.plan.regular_points, params);
        } catch (const PipelineUnavailableError&) {
            eff.verdict = Verdict::Inconclusive;
        }
        CAPTURE(name);
        CHECK_FALSE(forbidden_conjunction(kstar, eff, resc));
    }
}
