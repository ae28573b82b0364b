#include "expanse/flow_zoo.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace expanse::zoo {

namespace {

constexpr double kGolden = 1.6180339887498948482;

Vec rotate2(const Vec& p, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return Vec(c * p[0] - s * p[1], s * p[0] + c * p[1]);
}

FlowInstance make_annulus_periodic() {
    FlowInstance f;
    f.name = "annulus_periodic";
    f.space = Space::annulus(Vec(0.0, 0.0), 1.0, 2.0);
    f.field.dim = 2;
    f.field.value = [](const Vec& p) {
        const double u = p[0] * p[0] + p[1] * p[1];
        return Vec(-u * p[1], u * p[0]);
    };
    f.field.jacobian_analytic = [](const Vec& p) {
        const double x = p[0], y = p[1];
        Mat j = Mat::zero(2);
        j.at(0, 0) = -2.0 * x * y;
        j.at(0, 1) = -(x * x + 3.0 * y * y);
        j.at(1, 0) = 3.0 * x * x + y * y;
        j.at(1, 1) = 2.0 * x * y;
        return j;
    };
    f.analytic_orbit = [](const Vec& x0, double t) {
        const double r2 = x0.norm2();
        return rotate2(x0, r2 * t);
    };
    f.period_at = [](const Vec& x0) -> std::optional<double> {
        const double r2 = x0.norm2();
        if (r2 < 1e-12) return std::nullopt;
        return 2.0 * std::numbers::pi / r2;
    };
    f.notes = "circular orbits with radius-dependent periods on the annulus 1<=|p|<=2";
    f.plan.max_speed_hint = 8.0;
    f.plan.default_horizon = 20.0;
    for (const double r : {1.0, 1.25, 1.5, 1.75, 2.0})
        f.plan.regular_points.emplace_back(r, 0.0);
    f.plan.distinct_orbit_pairs = {{Vec(1.0, 0.0), Vec(1.25, 0.0)},
                                   {Vec(1.0, 0.0), Vec(2.0, 0.0)},
                                   {Vec(1.5, 0.0), Vec(2.0, 0.0)}};
    f.plan.same_orbit = {{Vec(1.0, 0.0), 0.1}, {Vec(2.0, 0.0), 0.05}};
    return f;
}

// Smooth periodic bump vanishing only at sigma = (0,0): agrees with
// exp(-d^2/s^2) to second order at sigma and is C^inf on the torus.
struct TorusBump {
    double s2 = 0.04;  // s = 0.2
    double q(const Vec& p) const {
        const double sx = std::sin(std::numbers::pi * p[0]);
        const double sy = std::sin(std::numbers::pi * p[1]);
        return (sx * sx + sy * sy) / (std::numbers::pi * std::numbers::pi);
    }
    double rho(const Vec& p) const { return -std::expm1(-q(p) / s2); }
    Vec grad_rho(const Vec& p) const {
        const double e = std::exp(-q(p) / s2);
        const double gx = std::sin(2.0 * std::numbers::pi * p[0]) / std::numbers::pi;
        const double gy = std::sin(2.0 * std::numbers::pi * p[1]) / std::numbers::pi;
        return Vec(e * gx / s2, e * gy / s2);
    }
};

FlowInstance make_torus_irrational_singular() {
    FlowInstance f;
    f.name = "torus_irrational_singular";
    f.space = Space::flat_torus();
    const double nrm = std::sqrt(1.0 + kGolden * kGolden);
    const Vec dir(1.0 / nrm, kGolden / nrm);
    const TorusBump bump;
    f.field.dim = 2;
    f.field.value = [bump, dir](const Vec& p) { return dir * bump.rho(p); };
    f.field.jacobian_analytic = [bump, dir](const Vec& p) {
        const Vec g = bump.grad_rho(p);
        Mat j = Mat::zero(2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) j.at(a, b) = dir[a] * g[b];
        return j;
    };
    f.fixed_points_truth = {Vec(0.0, 0.0)};
    f.notes = "unit golden-slope translation field scaled by a bump vanishing at one point";
    f.plan.max_speed_hint = 1.0;
    f.plan.default_horizon = 300.0;
    f.plan.regular_points = {Vec(0.5, 0.5), Vec(0.25, 0.66), Vec(0.7, 0.2)};
    const Vec nperp(-dir[1], dir[0]);
    const Vec base(0.31, 0.74);
    for (const double eps : {0.1, 0.2, 0.35}) {
        Vec other = base + nperp * eps;
        f.plan.distinct_orbit_pairs.push_back({base, f.space.project(other)});
    }
    f.plan.same_orbit = {{base, 0.1}};
    return f;
}

FlowInstance make_concentric_circles() {
    FlowInstance f;
    f.name = "concentric_circles";
    const double rmax = std::exp(-1.0);
    Space ambient = Space::disk(Vec(0.0, 0.0), rmax * 1.1);
    auto member = [](const Vec& p, double tol) {
        const double r = p.norm();
        if (r <= tol) return true;
        const double n = std::round(-std::log(r));
        if (n < 1.0) return false;
        return std::abs(r - std::exp(-n)) <= tol;
    };
    auto project = [](const Vec& p) {
        const double r = p.norm();
        if (r < 1e-15) return Vec(0.0, 0.0);
        double n = std::round(-std::log(r));
        if (n < 1.0) n = 1.0;
        if (n > 60.0) return Vec(0.0, 0.0);
        return p * (std::exp(-n) / r);
    };
    f.space = Space::invariant_subset("concentric_circles", ambient, member, project);
    f.field.dim = 2;
    f.field.value = [](const Vec& p) { return Vec(-p[1], p[0]); };
    f.field.jacobian_analytic = [](const Vec&) {
        Mat j = Mat::zero(2);
        j.at(0, 1) = -1.0;
        j.at(1, 0) = 1.0;
        return j;
    };
    f.analytic_orbit = [](const Vec& x0, double t) { return rotate2(x0, t); };
    f.period_at = [](const Vec& x0) -> std::optional<double> {
        if (x0.norm() < 1e-15) return std::nullopt;
        return 2.0 * std::numbers::pi;
    };
    f.fixed_points_truth = {Vec(0.0, 0.0)};
    f.notes = "unit-angular-speed rotation restricted to the circles |p| = e^-n";
    f.plan.max_speed_hint = rmax;
    f.plan.default_horizon = 20.0;
    for (const int n : {1, 2, 3, 4, 5, 6, 10, 15, 20})
        f.plan.regular_points.emplace_back(std::exp(double(-n)), 0.0);
    f.plan.distinct_orbit_pairs = {
        {Vec(std::exp(-1.0), 0.0), Vec(std::exp(-2.0), 0.0)},
        {Vec(std::exp(-5.0), 0.0), Vec(std::exp(-6.0), 0.0)}};
    f.plan.same_orbit = {{Vec(std::exp(-1.0), 0.0), 0.3}};
    return f;
}

Vec sphere_field_y(const Vec& p) {
    const double u = p[0] * p[0] + p[1] * p[1];
    return Vec(p[0] * p[2], p[1] * p[2], -u);
}

Mat sphere_jacobian_y(const Vec& p) {
    Mat j = Mat::zero(3);
    j.at(0, 0) = p[2];
    j.at(0, 2) = p[0];
    j.at(1, 1) = p[2];
    j.at(1, 2) = p[1];
    j.at(2, 0) = -2.0 * p[0];
    j.at(2, 1) = -2.0 * p[1];
    return j;
}

FlowInstance make_sphere_ns(bool cubic) {
    FlowInstance f;
    f.name = cubic ? "sphere_ns_cubic" : "sphere_ns";
    f.space = Space::unit_sphere();
    f.field.dim = 3;
    if (cubic) {
        f.field.value = [](const Vec& p) {
            const double u = p[0] * p[0] + p[1] * p[1];
            return sphere_field_y(p) * u;
        };
        f.field.jacobian_analytic = [](const Vec& p) {
            const double u = p[0] * p[0] + p[1] * p[1];
            const Vec y = sphere_field_y(p);
            const Mat jy = sphere_jacobian_y(p);
            // d(uY) = u dY + Y (du)^T with du = (2x, 2y, 0)
            Mat j = Mat::zero(3);
            const double du[3] = {2.0 * p[0], 2.0 * p[1], 0.0};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) j.at(a, b) = u * jy.at(a, b) + y[a] * du[b];
            return j;
        };
    } else {
        f.field.value = sphere_field_y;
        f.field.jacobian_analytic = sphere_jacobian_y;
    }
    f.fixed_points_truth = {Vec(0.0, 0.0, 1.0), Vec(0.0, 0.0, -1.0)};
    f.radial_coordinate = [](const Vec& p) {
        return std::sqrt(p[0] * p[0] + p[1] * p[1]);
    };
    f.notes = cubic ? "north-south sphere flow slowed by the cylinder-radius squared"
                    : "north-south sphere flow with linear speed near the poles";
    f.plan.max_speed_hint = 1.0;
    f.plan.default_horizon = 100.0;
    f.plan.regular_points = {Vec(1.0, 0.0, 0.0), Vec(0.0, 1.0, 0.0),
                             Vec(std::sqrt(0.75), 0.0, 0.5)};
    f.plan.distinct_orbit_pairs = {
        {Vec(1.0, 0.0, 0.0), Vec(std::cos(0.5), std::sin(0.5), 0.0)},
        {Vec(1.0, 0.0, 0.0), Vec(std::cos(0.02), std::sin(0.02), 0.0)}};
    f.plan.same_orbit = {{Vec(1.0, 0.0, 0.0), 0.3}};
    return f;
}

FlowInstance make_zero_field() {
    FlowInstance f;
    f.name = "zero_field";
    f.space = Space::unit_sphere();
    f.field.dim = 3;
    f.field.value = [](const Vec&) { return Vec(0.0, 0.0, 0.0); };
    f.field.jacobian_analytic = [](const Vec&) { return Mat::zero(3); };
    f.analytic_orbit = [](const Vec& x0, double) { return x0; };
    f.every_point_fixed = true;
    f.notes = "identically zero field; every point is fixed";
    f.plan.max_speed_hint = 0.0;
    f.plan.default_horizon = 10.0;
    f.plan.distinct_orbit_pairs = {
        {Vec(1.0, 0.0, 0.0), Vec(std::cos(0.01), std::sin(0.01), 0.0)},
        {Vec(0.0, 0.0, 1.0), Vec(std::sin(0.01), 0.0, std::cos(0.01))}};
    return f;
}

FlowInstance make_rotation_unit() {
    FlowInstance f;
    f.name = "rotation_unit";
    f.space = Space::disk(Vec(0.0, 0.0), 1.0);
    f.field.dim = 2;
    f.field.value = [](const Vec& p) { return Vec(-p[1], p[0]); };
    f.field.jacobian_analytic = [](const Vec&) {
        Mat j = Mat::zero(2);
        j.at(0, 1) = -1.0;
        j.at(1, 0) = 1.0;
        return j;
    };
    f.analytic_orbit = [](const Vec& x0, double t) { return rotate2(x0, t); };
    f.period_at = [](const Vec& x0) -> std::optional<double> {
        if (x0.norm() < 1e-12) return std::nullopt;
        return 2.0 * std::numbers::pi;
    };
    f.fixed_points_truth = {Vec(0.0, 0.0)};
    f.notes = "rigid rotation of the unit disk (calibration field)";
    f.plan.max_speed_hint = 1.0;
    f.plan.default_horizon = 20.0;
    f.plan.regular_points = {Vec(1.0, 0.0), Vec(0.5, 0.0), Vec(0.0, 0.75),
                             Vec(0.05, 0.0)};
    f.plan.distinct_orbit_pairs = {{Vec(0.5, 0.0), Vec(0.505, 0.0)},
                                   {Vec(0.5, 0.0), Vec(0.8, 0.0)}};
    f.plan.same_orbit = {{Vec(0.5, 0.0), 0.4}};
    return f;
}

FlowInstance make_constant_drift() {
    FlowInstance f;
    f.name = "constant_drift";
    f.space = Space::disk(Vec(0.0, 0.0), 1.0);
    f.field.dim = 2;
    f.field.value = [](const Vec&) { return Vec(1.0, 0.0); };
    f.field.jacobian_analytic = [](const Vec&) { return Mat::zero(2); };
    f.analytic_orbit = [](const Vec& x0, double t) { return Vec(x0[0] + t, x0[1]); };
    f.notes = "unit drift along x (calibration field)";
    f.plan.max_speed_hint = 1.0;
    f.plan.default_horizon = 0.9;
    f.plan.regular_points = {Vec(0.0, 0.0), Vec(-0.5, 0.3), Vec(-0.2, -0.4)};
    f.plan.distinct_orbit_pairs = {{Vec(-0.5, 0.0), Vec(-0.5, 0.01)},
                                   {Vec(-0.5, 0.0), Vec(-0.5, 0.4)}};
    f.plan.same_orbit = {{Vec(-0.5, 0.0), 0.2}};
    return f;
}

FlowInstance make_linear_saddle() {
    FlowInstance f;
    f.name = "linear_saddle";
    f.space = Space::disk(Vec(0.0, 0.0), 1.0);
    f.field.dim = 2;
    f.field.value = [](const Vec& p) { return Vec(p[0], -p[1]); };
    f.field.jacobian_analytic = [](const Vec&) {
        Mat j = Mat::zero(2);
        j.at(0, 0) = 1.0;
        j.at(1, 1) = -1.0;
        return j;
    };
    f.analytic_orbit = [](const Vec& x0, double t) {
        return Vec(x0[0] * std::exp(t), x0[1] * std::exp(-t));
    };
    f.fixed_points_truth = {Vec(0.0, 0.0)};
    f.notes = "linear hyperbolic saddle on the unit disk (calibration field)";
    f.plan.max_speed_hint = 1.0;
    f.plan.default_horizon = 2.0;
    f.plan.regular_points = {Vec(0.3, 0.3), Vec(0.5, 0.1), Vec(0.1, 0.5)};
    f.plan.distinct_orbit_pairs = {{Vec(0.1, 0.1), Vec(0.1, 0.11)},
                                   {Vec(0.2, 0.1), Vec(0.1, 0.2)}};
    f.plan.same_orbit = {{Vec(0.1, 0.1), 0.5}};
    return f;
}

const std::map<std::string, FlowInstance>& registry() {
    static const std::map<std::string, FlowInstance> reg = [] {
        std::map<std::string, FlowInstance> r;
        for (auto&& f :
             {make_annulus_periodic(), make_torus_irrational_singular(),
              make_concentric_circles(), make_sphere_ns(true), make_sphere_ns(false),
              make_zero_field(), make_rotation_unit(), make_constant_drift(),
              make_linear_saddle()}) {
            r.emplace(f.name, std::move(f));
        }
        return r;
    }();
    return reg;
}

}  // namespace

const FlowInstance& get(const std::string& name) {
    const auto& reg = registry();
    const auto it = reg.find(name);
    if (it == reg.end()) {
        std::ostringstream os;
        os << "unknown flow '" << name << "'; registered:";
        for (const auto& [k, v] : reg) os << " " << k;
        throw DomainError(os.str());
    }
    return it->second;
}

std::vector<std::string> list() {
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

}  // namespace expanse::zoo
