#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "expanse/flow_zoo.hpp"
#include "expanse/rescaled_metric.hpp"

using namespace expanse;

namespace {
constexpr double kPi = std::numbers::pi;

VectorField rotation_field() {
    VectorField f;
    f.dim = 2;
    f.value = [](const Vec& p) { return Vec(-p[1], p[0]); };
    return f;
}

VectorField constant_field(double c) {
    VectorField f;
    f.dim = 2;
    f.value = [c](const Vec&) { return Vec(c, 0.0); };
    return f;
}

std::vector<Vec> line_samples(const Vec& a, const Vec& b, int n) {
    std::vector<Vec> pts;
    for (int i = 0; i < n; ++i) pts.push_back(a + (b - a) * (double(i) / (n - 1)));
    return pts;
}
}  // namespace

TEST_CASE("lengths against closed forms") {
    // constant speed c: length L costs L / c
    const VectorField f2 = constant_field(2.0);
    const auto seg = line_samples(Vec(0, 0), Vec(3, 0), 5000);
    CHECK(rescaled_length(f2, seg) == doctest::Approx(1.5).epsilon(1e-12));

    // circle of radius r under rotation: speed r, so the circle costs 2 pi
    const VectorField rot = rotation_field();
    for (const double r : {0.3, 1.0, 2.0}) {
        std::vector<Vec> circle;
        const int n = 20000;
        for (int i = 0; i <= n; ++i) {
            const double a = 2.0 * kPi * i / n;
            circle.emplace_back(r * std::cos(a), r * std::sin(a));
        }
        CHECK(rescaled_length(rot, circle) == doctest::Approx(2.0 * kPi).epsilon(1e-7));
    }

    // radial segment between the circles e^-2 and e^-1 costs log(e) = 1
    const auto radial = line_samples(Vec(std::exp(-2.0), 0.0), Vec(std::exp(-1.0), 0.0), 10000);
    CHECK(rescaled_length(rot, radial) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("length is additive under concatenation") {
    const VectorField rot = rotation_field();
    const auto all = line_samples(Vec(0.1, 0.2), Vec(0.5, 0.9), 1001);
    const std::vector<Vec> left(all.begin(), all.begin() + 501);
    const std::vector<Vec> right(all.begin() + 500, all.end());
    const double whole = rescaled_length(rot, all);
    const double split = rescaled_length(rot, left) + rescaled_length(rot, right);
    CHECK(std::abs(whole - split) <= 1e-12);
}

TEST_CASE("refining a sampled curve converges") {
    const VectorField rot = rotation_field();
    const Vec a(std::exp(-2.0), 0.0), b(std::exp(-1.0), 0.0);
    const double l1 = rescaled_length(rot, line_samples(a, b, 20000));
    const double l2 = rescaled_length(rot, line_samples(a, b, 40000));
    CHECK(std::abs(l1 - l2) <= 1e-6);
}

TEST_CASE("the metric refuses points at a field zero") {
    const VectorField rot = rotation_field();
    const auto through_origin = line_samples(Vec(-0.1, 0.0), Vec(0.1, 0.0), 11);
    CHECK_THROWS_AS(rescaled_length(rot, through_origin), MetricUndefinedError);
}

TEST_CASE("segment weights split dyadically without drift") {
    const VectorField rot = rotation_field();
    const Vec a(0.21, 0.37), b(0.58, 0.11);
    const Vec m = (a + b) * 0.5;
    const double whole = rescaled_segment_weight(rot, a, b);
    const double halves = rescaled_segment_weight(rot, a, m) + rescaled_segment_weight(rot, m, b);
    CHECK(std::abs(whole - halves) <= 1e-12);
}

TEST_CASE("grid construction and vertex lookup") {
    const Vec p(std::exp(-1.0), 0.0), q(std::exp(-2.0), 0.0);
    const GridSpec g = GridSpec::containing(p, q, 64, 12);
    REQUIRE(g.locate(p).has_value());
    REQUIRE(g.locate(q).has_value());
    CHECK_FALSE(g.locate(Vec(10.0, 10.0)).has_value());
    const auto [pi_, pj] = *g.locate(p);
    CHECK(euclid(g.vertex(pi_, pj), p) <= 1e-12);
}

TEST_CASE("mesh distances: uniform speed reduces to scaled Euclidean") {
    const VectorField f2 = constant_field(2.0);
    GridSpec g;
    g.x0 = 0.0;
    g.y0 = 0.0;
    g.h = 0.01;
    g.nx = 101;
    g.ny = 101;
    const Vec fix_none[0] = {};
    const std::span<const Vec> fix(fix_none, 0);

    // axis-aligned and diagonal queries are represented exactly
    const double d_axis = rescaled_distance_mesh(f2, g, Vec(0.1, 0.2), Vec(0.9, 0.2), fix);
    CHECK(d_axis == doctest::Approx(0.8 / 2.0).epsilon(1e-9));
    const double d_diag = rescaled_distance_mesh(f2, g, Vec(0.1, 0.1), Vec(0.6, 0.6), fix);
    CHECK(d_diag == doctest::Approx(std::sqrt(0.5) / 2.0).epsilon(1e-9));
    // a mixed direction pays at most the 8-connected overhead (~8.2%)
    const double d_mix = rescaled_distance_mesh(f2, g, Vec(0.1, 0.1), Vec(0.9, 0.5), fix);
    const double true_mix = euclid(Vec(0.1, 0.1), Vec(0.9, 0.5)) / 2.0;
    CHECK(d_mix >= true_mix - 1e-9);
    CHECK(d_mix <= 1.083 * true_mix);

    CHECK(rescaled_distance_mesh(f2, g, Vec(0.5, 0.5), Vec(0.5, 0.5), fix) == 0.0);
}

TEST_CASE("the gap between adjacent circles costs one unit") {
    const VectorField rot = rotation_field();
    const Vec p(std::exp(-1.0), 0.0), q(std::exp(-2.0), 0.0);
    const GridSpec g = GridSpec::containing(p, q, 64, 12);
    const Vec fix[] = {Vec(0.0, 0.0)};
    const double d = rescaled_distance_mesh(rot, g, p, q, fix);
    CHECK(d == doctest::Approx(1.0).epsilon(0.05));
    CHECK(d >= 1.0 - 1e-4);  // upper bound, up to the edge quadrature bias
}

TEST_CASE("refinement never increases the mesh distance") {
    const VectorField rot = rotation_field();
    const Vec p(std::exp(-1.0), 0.0), q(std::exp(-2.0), 0.0);
    const GridSpec g = GridSpec::containing(p, q, 32, 6);
    const GridSpec fine = g.refined();
    const Vec fix[] = {Vec(0.0, 0.0)};
    const double d0 = rescaled_distance_mesh(rot, g, p, q, fix);
    const double d1 = rescaled_distance_mesh(rot, fine, p, q, fix);
    CHECK(d1 <= d0 + 1e-12);
}

TEST_CASE("graph distances obey the triangle inequality") {
    const VectorField rot = rotation_field();
    GridSpec g;
    g.x0 = 0.1;
    g.y0 = 0.1;
    g.h = 0.02;
    g.nx = 41;
    g.ny = 41;
    const Vec fix_none[0] = {};
    const std::span<const Vec> fix(fix_none, 0);
    const Vec a = g.vertex(3, 5), b = g.vertex(30, 12), c = g.vertex(17, 33);
    const double ab = rescaled_distance_mesh(rot, g, a, b, fix);
    const double bc = rescaled_distance_mesh(rot, g, b, c, fix);
    const double ac = rescaled_distance_mesh(rot, g, a, c, fix);
    CHECK(ac <= ab + bc + 1e-12);
}

TEST_CASE("queries inside the exclusion radius are rejected") {
    const VectorField rot = rotation_field();
    GridSpec g;
    g.x0 = -0.05;
    g.y0 = -0.05;
    g.h = 0.01;
    g.nx = 11;
    g.ny = 11;
    const Vec fix[] = {Vec(0.0, 0.0)};
    CHECK_THROWS_AS(
        rescaled_distance_mesh(rot, g, Vec(0.0, 0.0), Vec(0.05, 0.05), fix, 1e-3),
        DomainError);
    CHECK_THROWS_AS(rescaled_distance_mesh(rot, g, Vec(0.3, 0.3), Vec(0.0, 0.0), fix),
                    DomainError);
}

TEST_CASE("speed comparison: ordinary closeness bounds rescaled closeness") {
    // with B = C = 1 for the rotation field and rho = 0.12, the path bound
    // B C rho / (1 - rho B) ~ 0.1364 stays below delta = 0.2
    const VectorField rot = rotation_field();
    const double rho = 0.12, delta = 0.2;
    const double bound = rho / (1.0 - rho);
    REQUIRE(bound < delta);

    GridSpec g;
    g.x0 = 0.3;
    g.y0 = 0.3;
    g.h = 0.005;
    g.nx = 81;
    g.ny = 81;
    const Vec fix[] = {Vec(0.0, 0.0)};

    int pairs = 0;
    for (int i = 10; i < 70 && pairs < 25; i += 12) {
        for (int j = 10; j < 70 && pairs < 25; j += 12) {
            const Vec p = g.vertex(i, j);
            const double budget = rho * rot.value(p).norm();
            const int max_cells = static_cast<int>(budget / g.h);
            if (max_cells < 1) continue;
            const Vec q = g.vertex(i + max_cells, j);
            if (euclid(p, q) > budget) continue;
            const double dr = rescaled_distance_mesh(rot, g, p, q, fix);
            CHECK(dr <= delta);
            ++pairs;
        }
    }
    CHECK(pairs >= 10);
}

TEST_CASE("the exponential chart is an isometry onto the rescaled plane") {
    const PropertyVerdict v = cylinder_isometry_check(1000, 1729);
    CHECK(v.verdict == Verdict::HoldsAtScale);
    CHECK(v.witness.at("max_relative_error").get<double>() <= 1e-9);

    // unit cases: both basis directions keep unit norm
    const double er = std::exp(0.4);
    const Vec push_r(er * std::cos(1.1), er * std::sin(1.1));
    const double speed = Vec(-push_r[1], push_r[0]).norm();
    CHECK(push_r.norm() / speed == doctest::Approx(1.0).epsilon(1e-15));
}
