#include "expanse/rescaled_metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>

namespace expanse {

namespace {
constexpr double kMetricFloor = 1e-10;

double speed_checked(const VectorField& field, const Vec& p) {
    const double s = field.value(p).norm();
    if (s <= kMetricFloor)
        throw MetricUndefinedError("rescaled metric undefined at " + p.str() +
                                   " (|X| = " + std::to_string(s) + ")");
    return s;
}
}  // namespace

double rescaled_length(const VectorField& field, std::span<const Vec> samples) {
    if (samples.size() < 2) return 0.0;
    for (const Vec& p : samples) speed_checked(field, p);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const Vec mid = (samples[i] + samples[i + 1]) * 0.5;
        total += euclid(samples[i], samples[i + 1]) / speed_checked(field, mid);
    }
    return total;
}

double rescaled_segment_weight(const VectorField& field, const Vec& a, const Vec& b,
                               double atom_len) {
    const double len = euclid(a, b);
    if (len == 0.0) return 0.0;
    int k = 0;
    while (len / double(1 << k) > atom_len && k < 30) ++k;
    const int atoms = 1 << k;
    double total = 0.0;
    for (int i = 0; i < atoms; ++i) {
        const double t = (i + 0.5) / atoms;
        const Vec mid = a + (b - a) * t;
        total += (len / atoms) / speed_checked(field, mid);
    }
    return total;
}

std::optional<std::pair<int, int>> GridSpec::locate(const Vec& p, double tol) const {
    const double fi = (p[0] - x0) / h, fj = (p[1] - y0) / h;
    const int i = static_cast<int>(std::lround(fi)), j = static_cast<int>(std::lround(fj));
    if (i < 0 || i >= nx || j < 0 || j >= ny) return std::nullopt;
    if (std::abs(fi - i) * h > tol || std::abs(fj - j) * h > tol) return std::nullopt;
    return std::make_pair(i, j);
}

GridSpec GridSpec::containing(const Vec& p, const Vec& q, int steps, int pad) {
    if (std::abs(p[1] - q[1]) > 1e-12)
        throw DomainError("GridSpec::containing: points must share a grid row");
    GridSpec g;
    g.h = std::abs(q[0] - p[0]) / steps;
    const double xlo = std::min(p[0], q[0]);
    g.x0 = xlo - pad * g.h;
    g.y0 = p[1] - pad * g.h;
    g.nx = steps + 2 * pad + 1;
    g.ny = 2 * pad + 1;
    return g;
}

double rescaled_distance_mesh(const VectorField& field, const GridSpec& grid,
                              const Vec& p, const Vec& q, std::span<const Vec> fix,
                              double exclusion) {
    const auto pi = grid.locate(p);
    const auto qi = grid.locate(q);
    if (!pi || !qi)
        throw DomainError("rescaled_distance_mesh: query points must be grid vertices");

    auto excluded = [&](const Vec& v) {
        for (const Vec& s : fix)
            if (euclid(v, s) < exclusion) return true;
        return false;
    };
    auto id = [&](int i, int j) { return j * grid.nx + i; };
    const int n = grid.nx * grid.ny;

    std::vector<char> dead(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (excluded(grid.vertex(i, j))) dead[static_cast<std::size_t>(id(i, j))] = 1;

    const int src = id(pi->first, pi->second), dst = id(qi->first, qi->second);
    if (dead[static_cast<std::size_t>(src)] || dead[static_cast<std::size_t>(dst)])
        throw DomainError(
            "rescaled_distance_mesh: a query point lies inside the exclusion radius");

    // Dijkstra over the 8-connected grid; edge weights are computed on
    // demand (each edge is visited a bounded number of times).
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(n), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(src)] = 0.0;
    heap.emplace(0.0, src);
    const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        if (u == dst) return d;
        const int ui = u % grid.nx, uj = u / grid.nx;
        const Vec up = grid.vertex(ui, uj);
        for (int e = 0; e < 8; ++e) {
            const int vi = ui + dx[e], vj = uj + dy[e];
            if (vi < 0 || vi >= grid.nx || vj < 0 || vj >= grid.ny) continue;
            const int v = id(vi, vj);
            if (dead[static_cast<std::size_t>(v)]) continue;
            const double w = rescaled_segment_weight(field, up, grid.vertex(vi, vj));
            if (d + w < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = d + w;
                heap.emplace(d + w, v);
            }
        }
    }
    return dist[static_cast<std::size_t>(dst)];
}

PropertyVerdict cylinder_isometry_check(int sample_count, std::uint64_t seed) {
    PropertyVerdict v;
    v.property = "isometry";
    v.parameters = {{"samples", sample_count}, {"seed", seed}, {"tolerance", 1e-9}};

    VectorField rotation;
    rotation.dim = 2;
    rotation.value = [](const Vec& p) { return Vec(-p[1], p[0]); };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u_r(-3.0, 1.0);
    std::uniform_real_distribution<double> u_th(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> u_v(-1.0, 1.0);

    double max_err = 0.0;
    nlohmann::ordered_json worst;
    for (int k = 0; k < sample_count; ++k) {
        const double r = u_r(rng), th = u_th(rng);
        double vr = u_v(rng), vt = u_v(rng);
        const double vn = std::sqrt(vr * vr + vt * vt);
        if (vn < 1e-6) continue;
        vr /= vn;
        vt /= vn;
        // Pushforward of (vr, vt) under (r,th) -> e^r (cos th, sin th).
        const double er = std::exp(r), c = std::cos(th), s = std::sin(th);
        const Vec base(er * c, er * s);
        const Vec push(er * (c * vr - s * vt), er * (s * vr + c * vt));
        const double speed = rotation.value(base).norm();
        const double ratio = push.norm() / speed;  // rescaled norm over flat norm (=1)
        const double err = std::abs(ratio - 1.0);
        if (err > max_err) {
            max_err = err;
            worst = {{"r", r}, {"theta", th}, {"vr", vr}, {"vt", vt}, {"ratio", ratio}};
        }
    }
    v.verdict = max_err <= 1e-9 ? Verdict::HoldsAtScale : Verdict::Violated;
    v.witness = {{"max_relative_error", max_err}, {"worst_sample", worst}};
    return v;
}

}  // namespace expanse
