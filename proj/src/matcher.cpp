#include "expanse/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace expanse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_pair(const OrbitSegment& P, const OrbitSegment& Q) {
    if (P.size() == 0 || Q.size() == 0)
        throw DomainError("matcher: empty orbit segment");
    if (!P.space.same_as(Q.space))
        throw DomainError("matcher: segments live on different spaces (" +
                          P.space.id() + " vs " + Q.space.id() + ")");
    if ((static_cast<long>(P.size()) + 1) * (static_cast<long>(Q.size()) + 1) > 30'000'000)
        throw SizeError("matcher: instance too large; downsample the segments");
}

inline double link_ratio(double dist, double w) {
    if (dist == 0.0) return 0.0;
    if (w <= 0.0) return kInf;
    return dist / w;
}

std::vector<double> cost_matrix(const OrbitSegment& P, const OrbitSegment& Q,
                                MatchMode mode, std::span<const double> weights) {
    const int n = P.size(), m = Q.size();
    std::vector<double> c(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        double w = 0.0;
        if (mode == MatchMode::Rescaled) {
            w = weights.empty() ? P.velocities[static_cast<std::size_t>(i)].norm()
                                : weights[static_cast<std::size_t>(i)];
        }
        for (int j = 0; j < m; ++j) {
            const double d = P.space.distance_unchecked(
                P.points[static_cast<std::size_t>(i)], Q.points[static_cast<std::size_t>(j)]);
            c[static_cast<std::size_t>(i) * m + j] =
                mode == MatchMode::Uniform ? d : link_ratio(d, w);
        }
    }
    return c;
}

Coupling backtrack_dp(const std::vector<double>& dp, int n, int m) {
    // dp obeys dp(i,j) = max(c(i,j), min of predecessors); walk back
    // preferring diagonal, then i-step, then j-step.
    Coupling cp;
    int i = n - 1, j = m - 1;
    cp.steps.emplace_back(i, j);
    auto at = [&](int a, int b) { return dp[static_cast<std::size_t>(a) * m + b]; };
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
            const double best = std::min({diag, up, left});
            if (diag == best) {
                --i;
                --j;
            } else if (up == best) {
                --i;
            } else {
                --j;
            }
        } else if (i > 0) {
            --i;
        } else {
            --j;
        }
        cp.steps.emplace_back(i, j);
    }
    std::reverse(cp.steps.begin(), cp.steps.end());
    return cp;
}

MatchResult minmax_dp(const OrbitSegment& P, const OrbitSegment& Q, MatchMode mode,
                      const std::vector<double>& c) {
    const int n = P.size(), m = Q.size();
    std::vector<double> dp(static_cast<std::size_t>(n) * m);
    auto cat = [&](int i, int j) { return c[static_cast<std::size_t>(i) * m + j]; };
    auto dat = [&](int i, int j) -> double& { return dp[static_cast<std::size_t>(i) * m + j]; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double pred;
            if (i == 0 && j == 0)
                pred = -kInf;
            else if (i == 0)
                pred = dat(0, j - 1);
            else if (j == 0)
                pred = dat(i - 1, 0);
            else
                pred = std::min({dat(i - 1, j - 1), dat(i - 1, j), dat(i, j - 1)});
            dat(i, j) = std::max(cat(i, j), pred);
        }
    }
    MatchResult r;
    r.mode = mode;
    r.min_delta = dat(n - 1, m - 1);
    r.feasible = std::isfinite(r.min_delta);
    if (r.feasible) r.coupling = backtrack_dp(dp, n, m);
    return r;
}

}  // namespace

MatchResult min_match_delta_uniform(const OrbitSegment& P, const OrbitSegment& Q) {
    validate_pair(P, Q);
    const auto c = cost_matrix(P, Q, MatchMode::Uniform, {});
    return minmax_dp(P, Q, MatchMode::Uniform, c);
}

namespace {

std::optional<Coupling> reachable_path(const std::vector<double>& c, int n, int m,
                                       double delta) {
    std::vector<char> reach(static_cast<std::size_t>(n) * m, 0);
    auto cat = [&](int i, int j) { return c[static_cast<std::size_t>(i) * m + j]; };
    auto rat = [&](int i, int j) -> char& {
        return reach[static_cast<std::size_t>(i) * m + j];
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            if (cat(i, j) > delta) continue;
            bool ok;
            if (i == 0 && j == 0)
                ok = true;
            else if (i == 0)
                ok = rat(0, j - 1);
            else if (j == 0)
                ok = rat(i - 1, 0);
            else
                ok = rat(i - 1, j - 1) || rat(i - 1, j) || rat(i, j - 1);
            rat(i, j) = ok ? 1 : 0;
        }
    }
    if (!rat(n - 1, m - 1)) return std::nullopt;
    Coupling cp;
    int i = n - 1, j = m - 1;
    cp.steps.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && rat(i - 1, j - 1)) {
            --i;
            --j;
        } else if (i > 0 && rat(i - 1, j)) {
            --i;
        } else if (j > 0 && rat(i, j - 1)) {
            --j;
        } else if (i > 0) {
            --i;
        } else {
            --j;
        }
        cp.steps.emplace_back(i, j);
    }
    std::reverse(cp.steps.begin(), cp.steps.end());
    return cp;
}

}  // namespace

std::pair<bool, std::optional<Coupling>> rescaled_feasible(const OrbitSegment& P,
                                                           const OrbitSegment& Q,
                                                           double delta) {
    validate_pair(P, Q);
    if (delta < 0.0) throw DomainError("rescaled_feasible: delta must be >= 0");
    const auto c = cost_matrix(P, Q, MatchMode::Rescaled, {});
    auto cp = reachable_path(c, P.size(), Q.size(), delta);
    return {cp.has_value(), std::move(cp)};
}

MatchResult min_match_delta_rescaled(const OrbitSegment& P, const OrbitSegment& Q) {
    validate_pair(P, Q);
    const int n = P.size(), m = Q.size();
    const auto c = cost_matrix(P, Q, MatchMode::Rescaled, {});

    std::vector<double> critical;
    critical.reserve(c.size());
    for (const double v : c)
        if (std::isfinite(v)) critical.push_back(v);
    std::sort(critical.begin(), critical.end());
    critical.erase(std::unique(critical.begin(), critical.end()), critical.end());

    MatchResult r;
    r.mode = MatchMode::Rescaled;
    if (critical.empty() || !reachable_path(c, n, m, critical.back())) {
        r.min_delta = kInf;
        r.feasible = false;
        return r;
    }
    // Smallest critical value admitting an anchored path.
    int lo = 0, hi = static_cast<int>(critical.size()) - 1;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (reachable_path(c, n, m, critical[static_cast<std::size_t>(mid)]))
            hi = mid;
        else
            lo = mid + 1;
    }
    r.min_delta = critical[static_cast<std::size_t>(lo)];
    r.feasible = true;
    r.coupling = *reachable_path(c, n, m, r.min_delta);
    return r;
}

double brute_force_oracle(const OrbitSegment& P, const OrbitSegment& Q, MatchMode mode,
                          std::span<const double> weights, bool anchored) {
    validate_pair(P, Q);
    const int n = P.size(), m = Q.size();
    if (static_cast<long>(n) * m > 64)
        throw SizeError("brute_force_oracle: grid larger than 64 cells");
    const auto c = cost_matrix(P, Q, mode, weights);
    auto cat = [&](int i, int j) { return c[static_cast<std::size_t>(i) * m + j]; };

    double best = kInf;
    // Depth-first over the three step kinds, tracking the running max.
    std::function<void(int, int, double)> walk = [&](int i, int j, double acc) {
        acc = std::max(acc, cat(i, j));
        if (acc >= best) return;
        if (i == n - 1 && j == m - 1) {
            best = acc;
            return;
        }
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
        if (i + 1 < n) walk(i + 1, j, acc);
        if (j + 1 < m) walk(i, j + 1, acc);
    };
    if (anchored) {
        walk(0, 0, -kInf);
    } else {
        for (int i = 0; i < n; ++i) walk(i, 0, -kInf);
        for (int j = 1; j < m; ++j) walk(0, j, -kInf);
    }
    return best;
}

namespace {

OrbitSegment reversed_from_origin(const OrbitSegment& bwd) {
    OrbitSegment r;
    r.flow_id = bwd.flow_id;
    r.space = bwd.space;
    r.stalled = bwd.stalled;
    r.exited_domain = bwd.exited_domain;
    const int k = bwd.size();
    for (int i = k - 1; i >= 0; --i) {
        r.times.push_back(-bwd.times[static_cast<std::size_t>(i)]);
        r.points.push_back(bwd.points[static_cast<std::size_t>(i)]);
        r.velocities.push_back(bwd.velocities[static_cast<std::size_t>(i)]);
    }
    return r;
}

}  // namespace

MatchResult min_match_delta_two_sided(const FlowInstance& flow, const Vec& x,
                                      const Vec& y, double horizon, double sample_dt,
                                      MatchMode mode) {
    IntegrateOptions o;
    o.sample_dt = sample_dt;
    const OrbitSegment pf = integrate_orbit(flow, x, 0.0, horizon, o);
    const OrbitSegment qf = integrate_orbit(flow, y, 0.0, horizon, o);
    const OrbitSegment pb = reversed_from_origin(integrate_orbit(flow, x, 0.0, -horizon, o));
    const OrbitSegment qb = reversed_from_origin(integrate_orbit(flow, y, 0.0, -horizon, o));

    MatchResult fwd, bwd;
    if (mode == MatchMode::Uniform) {
        fwd = min_match_delta_uniform(pf, qf);
        bwd = min_match_delta_uniform(pb, qb);
    } else {
        fwd = min_match_delta_rescaled(pf, qf);
        bwd = min_match_delta_rescaled(pb, qb);
    }
    MatchResult r = fwd;
    r.feasible = fwd.feasible && bwd.feasible;
    r.min_delta = std::max(fwd.min_delta, bwd.min_delta);
    return r;
}

}  // namespace expanse
