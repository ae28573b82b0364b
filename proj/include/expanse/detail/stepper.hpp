#pragma once

#include <functional>

#include "expanse/flow_engine.hpp"

namespace expanse::detail {

/// One accepted integrator step in internal forward time tau >= 0.
struct StepRecord {
    double tau0 = 0.0, tau1 = 0.0;
    Vec y0, y1;  // projected endpoints
    Vec f0, f1;  // direction-adjusted field at the endpoints
};

struct DriveResult {
    bool stalled = false;
    bool exited = false;
    double tau_end = 0.0;
    Vec y_end;
};

/// Dormand-Prince 5(4) with PI-style step control and per-step projection.
/// on_step may return false to stop early. g is the direction-adjusted field.
DriveResult dopri5_drive(const Space& space, const std::function<Vec(const Vec&)>& g,
                         const Vec& y0, double span, const IntegrateOptions& opts,
                         const std::function<bool(const StepRecord&)>& on_step);

/// Cubic Hermite evaluation inside a step at internal time tau; unwraps
/// across the torus seam before interpolating.
Vec hermite(const StepRecord& rec, double tau, const Space& space);

}  // namespace expanse::detail
