#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "expanse/flow_zoo.hpp"
#include "expanse/geometry.hpp"

using namespace expanse;

namespace {

std::mt19937_64 rng(20240811u);

Vec random_point(const Space& s) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    switch (s.kind()) {
        case SpaceKind::UnitSphere2: {
            Vec p(g(rng), g(rng), g(rng));
            return p * (1.0 / p.norm());
        }
        case SpaceKind::FlatTorus2:
            return Vec(u(rng), u(rng));
        default: {
            Vec lo, hi;
            s.bounding_box(lo, hi);
            for (int tries = 0; tries < 1000; ++tries) {
                Vec p(lo[0] + (hi[0] - lo[0]) * u(rng), lo[1] + (hi[1] - lo[1]) * u(rng));
                if (s.ambient().contains(p, 0.0)) return p;
            }
            return s.ambient().project(Vec(0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])));
        }
    }
}

}  // namespace

TEST_CASE("distances on the three space kinds") {
    const Space plane = Space::plane(2);
    CHECK(plane.distance(Vec(0, 0), Vec(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));

    const Space torus = Space::flat_torus();
    CHECK(torus.distance(Vec(0.1, 0.5), Vec(0.9, 0.5)) ==
          doctest::Approx(0.2).epsilon(1e-12));

    const Space sphere = Space::unit_sphere();
    CHECK(sphere.distance(Vec(1, 0, 0), Vec(-1, 0, 0)) ==
          doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("distance symmetry and triangle inequality on sampled triples") {
    for (const Space& s : {Space::disk(Vec(0, 0), 1.5), Space::flat_torus(),
                           Space::unit_sphere()}) {
        for (int k = 0; k < 1000; ++k) {
            const Vec a = random_point(s), b = random_point(s), c = random_point(s);
            const double ab = s.distance_unchecked(a, b);
            const double ba = s.distance_unchecked(b, a);
            const double ac = s.distance_unchecked(a, c);
            const double cb = s.distance_unchecked(c, b);
            CHECK(std::abs(ab - ba) <= 1e-12);
            CHECK(ac + cb - ab >= -1e-12);
        }
    }
}

TEST_CASE("projection rules and idempotence") {
    const Space sphere = Space::unit_sphere();
    const Vec sp = sphere.project(Vec(0, 0, 2));
    CHECK(sp[0] == 0.0);
    CHECK(sp[1] == 0.0);
    CHECK(sp[2] == 1.0);
    CHECK_THROWS_AS(sphere.project(Vec(0, 0, 0)), DomainError);

    const Space torus = Space::flat_torus();
    const Vec tp = torus.project(Vec(1.25, -0.5));
    CHECK(tp[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(tp[1] == doctest::Approx(0.5).epsilon(1e-15));

    const Space disk = Space::disk(Vec(0, 0), 1.0);
    const Vec dp = disk.project(Vec(0.3, -0.2));
    CHECK(dp[0] == 0.3);
    CHECK(dp[1] == -0.2);

    for (const Space& s : {disk, torus, sphere}) {
        for (int k = 0; k < 100; ++k) {
            const Vec p = random_point(s);
            const Vec p1 = s.project(p);
            const Vec p2 = s.project(p1);
            CHECK(euclid(p1, p2) <= 1e-15);
        }
    }
}

TEST_CASE("membership violations raise domain errors that name the problem") {
    const Space annulus = Space::annulus(Vec(0, 0), 1.0, 2.0);
    CHECK_THROWS_AS(annulus.distance(Vec(0.1, 0.0), Vec(1.5, 0.0)), DomainError);
    try {
        annulus.require_member(Vec(5.0, 0.0));
        CHECK(false);
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("5") != std::string::npos);
    }
    const Space box = Space::box(Vec(0, 0), Vec(1, 1));
    try {
        box.require_member(Vec(0.5, 3.0));
        CHECK(false);
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("coordinate 2") != std::string::npos);
    }
}

TEST_CASE("jacobians: analytic cases") {
    VectorField rot;
    rot.dim = 2;
    rot.value = [](const Vec& p) { return Vec(-p[1], p[0]); };
    const Mat j = jacobian(rot, Vec(0.3, -0.7));  // finite differences
    CHECK(j.at(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(j.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(j.at(1, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j.at(1, 1) == doctest::Approx(0.0).epsilon(1e-9));

    VectorField saddle;
    saddle.dim = 2;
    saddle.value = [](const Vec& p) { return Vec(p[0], -p[1]); };
    const Mat js = jacobian(saddle, Vec(2, 3));
    CHECK(js.at(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(js.at(1, 1) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(std::abs(js.at(0, 1)) <= 1e-10);
    CHECK(std::abs(js.at(1, 0)) <= 1e-10);

    // Cubic north-south field: every component is cubic in the offset from
    // the pole, so the Jacobian vanishes there.
    const auto& sx = zoo::get("sphere_ns_cubic");
    const Mat jp = jacobian(sx.field, Vec(0, 0, 1));
    CHECK(jp.max_abs() <= 1e-12);
    const Mat jp_fd = jacobian_fd(sx.field, Vec(0, 0, 1));
    CHECK(jp_fd.max_abs() <= 1e-7);
}

TEST_CASE("finite differences track the analytic jacobians of all registered fields") {
    for (const auto& name : zoo::list()) {
        const auto& f = zoo::get(name);
        REQUIRE(f.field.jacobian_analytic);
        for (int k = 0; k < 100; ++k) {
            const Vec p = random_point(f.space);
            const Mat ja = f.field.jacobian_analytic(p);
            const Mat jf = jacobian_fd(f.field, p);
            double err = 0.0;
            for (int a = 0; a < ja.n; ++a)
                for (int b = 0; b < ja.n; ++b)
                    err = std::max(err, std::abs(ja.at(a, b) - jf.at(a, b)));
            CHECK(err <= 1e-7);
        }
    }
}

TEST_CASE("sphere fields are tangent to the sphere") {
    for (const char* name : {"sphere_ns_cubic", "sphere_ns"}) {
        const auto& f = zoo::get(name);
        for (int k = 0; k < 1000; ++k) {
            const Vec p = random_point(f.space);
            CHECK(std::abs(f.field.value(p).dot(p)) <= 1e-12);
        }
    }
}

TEST_CASE("spectrum: eigenvalues and least singular value") {
    Mat rot = Mat::zero(2);
    rot.at(0, 1) = -1.0;
    rot.at(1, 0) = 1.0;
    const SpectrumSummary sr = spectrum(rot);
    CHECK(sr.eigenvalues[0].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(sr.eigenvalues[0].imag()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sr.min_singular_value == doctest::Approx(1.0).epsilon(1e-12));

    Mat d = Mat::zero(3);
    d.at(0, 0) = 1.0;
    d.at(1, 1) = 1.0;
    const SpectrumSummary sd = spectrum(d);
    CHECK(sd.min_singular_value <= 1e-12);

    Mat sad = Mat::zero(2);
    sad.at(0, 0) = 1.0;
    sad.at(1, 1) = -1.0;
    const SpectrumSummary ss = spectrum(sad);
    CHECK(ss.eigenvalues[0].real() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ss.eigenvalues[1].real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ss.min_singular_value == doctest::Approx(1.0).epsilon(1e-12));

    Mat bad = Mat::zero(2);
    bad.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(spectrum(bad), NumericError);
}

TEST_CASE("zero least singular value exactly when some eigenvalue vanishes") {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        Mat m = Mat::zero(2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m.at(i, j) = u(rng);
        const bool make_singular = k % 2 == 0;
        if (make_singular) {  // second row = multiple of the first
            const double c = u(rng);
            m.at(1, 0) = c * m.at(0, 0);
            m.at(1, 1) = c * m.at(0, 1);
        }
        const SpectrumSummary s = spectrum(m);
        double min_eig = 1e300;
        for (int e = 0; e < s.n; ++e) min_eig = std::min(min_eig, std::abs(s.eigenvalues[e]));
        if (make_singular) {
            CHECK(s.min_singular_value <= 1e-10 * std::max(1.0, m.max_abs()));
            CHECK(min_eig <= 1e-7);
        } else if (s.min_singular_value > 1e-10) {
            CHECK(min_eig > 1e-12);
        }
    }
}

TEST_CASE("meshes stay on their spaces") {
    const auto sphere_mesh = mesh_points(Space::unit_sphere(), 2000);
    CHECK(sphere_mesh.size() == 2000);
    for (const auto& p : sphere_mesh) CHECK(std::abs(p.norm() - 1.0) <= 1e-12);

    const Space annulus = Space::annulus(Vec(0, 0), 1.0, 2.0);
    const auto am = mesh_points(annulus, 10000);
    CHECK(am.size() > 1000);
    for (const auto& p : am) CHECK(annulus.contains(p, 0.0));
}
