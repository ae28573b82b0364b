#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "expanse/flow_engine.hpp"

namespace expanse {

enum class MatchMode { Uniform, Rescaled };

/// Anchored monotone lattice path: starts at (0,0), ends at (n,m), each
/// step increments i, j, or both.
struct Coupling {
    std::vector<std::pair<int, int>> steps;
};

struct MatchResult {
    double min_delta = 0.0;
    Coupling coupling;
    bool feasible = true;
    MatchMode mode = MatchMode::Uniform;
};

/// Exact minimal max-link delta over all anchored monotone couplings
/// (anchored discrete Frechet distance). Ties in the backtrack prefer
/// the diagonal, then the i-step.
MatchResult min_match_delta_uniform(const OrbitSegment& P, const OrbitSegment& Q);

/// Reachability at fixed delta in rescaled mode: cell (i,j) is admissible
/// iff dist(P_i,Q_j) <= delta * |velocity(P_i)|.
std::pair<bool, std::optional<Coupling>> rescaled_feasible(const OrbitSegment& P,
                                                           const OrbitSegment& Q,
                                                           double delta);

/// Exact minimal delta in rescaled mode: sorted critical ratios plus a
/// binary search over rescaled_feasible. Zero velocity on P makes a cell
/// admissible only at zero distance.
MatchResult min_match_delta_rescaled(const OrbitSegment& P, const OrbitSegment& Q);

/// Full enumeration of anchored monotone lattice paths; min over paths of
/// the max link cost. Requires (n+1)*(m+1) <= 64 (SizeError otherwise).
/// `weights` overrides the per-P-sample rescaling weights; `anchored`
/// false additionally allows the path to start anywhere on the bottom or
/// left boundary of the grid.
double brute_force_oracle(const OrbitSegment& P, const OrbitSegment& Q, MatchMode mode,
                          std::span<const double> weights = {}, bool anchored = true);

/// Two-sided match: forward and backward halves are matched separately,
/// both anchored at the shared origin sample; the result is the worse of
/// the two. The returned coupling is the forward one.
MatchResult min_match_delta_two_sided(const FlowInstance& flow, const Vec& x,
                                      const Vec& y, double horizon, double sample_dt,
                                      MatchMode mode);

}  // namespace expanse
