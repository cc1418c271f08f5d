#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace waveapost {

/// Spatial point. One-dimensional problems use the x component only.
using Point = Eigen::Vector2d;

using ElemId = std::int32_t;
using VertexId = std::int32_t;

inline constexpr ElemId kNoElem = -1;

/// x -> value
using SpatialFn = std::function<double(const Point&)>;
/// (x, t) -> value
using SpaceTimeFn = std::function<double(const Point&, double)>;
/// x -> gradient
using GradientFn = std::function<Point(const Point&)>;

/// Shared, identity-carrying spatial function. Fields merge analytic terms by
/// pointer identity, so the same callback reused across steps is evaluated once.
using SharedFn = std::shared_ptr<const SpatialFn>;

inline SharedFn make_shared_fn(SpatialFn fn) {
    return std::make_shared<const SpatialFn>(std::move(fn));
}

/// Raised when a linear solve does not reach the requested tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what + " (relative residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Raised when two meshes do not share a refinement forest.
class IncompatibleMeshes : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace waveapost
