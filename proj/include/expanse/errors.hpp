#pragma once

#include <stdexcept>
#include <string>

namespace expanse {

/// A point fed to an operation does not belong to the space it claims.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite input or a numeric routine left its validated envelope.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Instance exceeds a hard size precondition (e.g. oracle grids).
struct SizeError : std::runtime_error {
    explicit SizeError(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation of the rescaled metric at (or too close to) a fixed point.
struct MetricUndefinedError : std::runtime_error {
    explicit MetricUndefinedError(const std::string& what) : std::runtime_error(what) {}
};

/// Curvature requested at a point where the field vanishes.
struct NearFixedPointError : std::runtime_error {
    explicit NearFixedPointError(const std::string& what) : std::runtime_error(what) {}
};

/// Speed-bound constants requested for a flow without fixed points.
struct ConstantsUndefinedError : std::runtime_error {
    explicit ConstantsUndefinedError(const std::string& what) : std::runtime_error(what) {}
};

/// The efficiency pipeline cannot run: the speed/distance ratio diverges
/// under mesh refinement (non-invertible linearization at a fixed point).
struct PipelineUnavailableError : std::runtime_error {
    explicit PipelineUnavailableError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace expanse
