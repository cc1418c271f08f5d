#pragma once

#include "waveapost/field.hpp"

#include <map>
#include <vector>

namespace waveapost {

/// u_tt - div(a grad u) = f on the domain, u = 0 on the boundary,
/// u(0) = u0, u_t(0) = u1.
struct ProblemSpec {
    Domain domain;
    Coefficient a = Coefficient::constant(1.0);
    SpaceTimeFn f;
    SpatialFn u0;
    SpatialFn u1;
    double final_time = 1.0;
    /// Optional exact solution and its time derivative, for verification.
    SpaceTimeFn exact_u;
    SpaceTimeFn exact_ut;

    bool has_exact() const { return static_cast<bool>(exact_u); }
    void validate() const;
};

/// Knots 0 = t^0 < t^1 < ... < t^N = T.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> knots);
    static TimeGrid uniform(double final_time, int steps);

    int steps() const { return static_cast<int>(knots_.size()) - 1; }
    double t(int n) const { return knots_[static_cast<std::size_t>(n)]; }
    /// k_n = t^n - t^{n-1}, n >= 1.
    double k(int n) const { return knots_[static_cast<std::size_t>(n)] - knots_[static_cast<std::size_t>(n - 1)]; }
    double final_time() const { return knots_.back(); }
    double max_step() const;
    const std::vector<double>& knots() const { return knots_; }
    /// n with t in (t^{n-1}, t^n]; 0 only for t = 0.
    int interval_of(double t) const;

private:
    std::vector<double> knots_;
};

enum class LoadMode {
    Pointwise,  ///< f^n = f(t^n)
    Average     ///< f^n = time average of f over (t^{n-1}, t^n]
};

struct StepperOptions {
    int degree = 1;
    LoadMode load = LoadMode::Pointwise;
    /// Gauss points for the time averages of f.
    int time_quad_points = 5;
    /// Spatial quadrature degree for analytic data (-1: 2p + 2).
    int space_quad_degree = -1;
    SolverOptions solver;

    int space_degree() const { return space_quad_degree < 0 ? default_quad_degree(degree) : space_quad_degree; }
};

struct MeshAction {
    enum class Kind { Refine, Coarsen };
    Kind kind = Kind::Refine;
    Point lo = Point::Zero();
    Point hi = Point::Zero();
};

/// Per-step refine/coarsen actions addressed by coordinate boxes. Steps
/// without actions keep the previous mesh object.
class MeshSchedule {
public:
    MeshSchedule() = default;
    static MeshSchedule fixed() { return {}; }

    void add(int step, MeshAction action) { actions_[step].push_back(action); }
    bool empty() const { return actions_.empty(); }
    Mesh apply(int step, const Mesh& previous) const;

private:
    std::map<int, std::vector<MeshAction>> actions_;
};

struct StepRecord {
    int n = 0;
    double t = 0.0;
    double k = 0.0;  ///< 0 for n = 0
    FeSpace space;
    FeFunction U;
    /// Backward difference (U^n - U^{n-1}) / k_n kept exactly across meshes;
    /// V^0 for n = 0.
    Field dU;

    const Mesh& mesh() const { return space.mesh(); }
};

/// Fully discrete history plus the data the estimators need.
struct Trajectory {
    ProblemSpec problem;
    TimeGrid grid;
    StepperOptions options;
    std::vector<StepRecord> records;
    std::vector<SharedFn> f_knot;  ///< f(t^n, .)
    std::vector<SharedFn> f_bar;   ///< time averages; f_bar[0] = f(0, .)

    int steps() const { return grid.steps(); }
    const StepRecord& operator[](int n) const { return records[static_cast<std::size_t>(n)]; }
    /// Data used by the scheme at step n (f(t^n) or its average).
    const SharedFn& load(int n) const;
};

/// Time average over (t0, t1] of f by an n-point Gauss rule.
SharedFn time_average(const SpaceTimeFn& f, double t0, double t1, int points);
SharedFn at_time(const SpaceTimeFn& f, double t);

StepRecord initialize(const ProblemSpec& problem, const Mesh& mesh0, const StepperOptions& opts = {});

/// One step of the implicit scheme on `mesh_n`; cross-mesh data are transferred
/// exactly through the common refinement.
StepRecord step(const StepRecord& previous, const Mesh& mesh_n, double t_n, double k_n, const SharedFn& load,
                const Coefficient& a, const StepperOptions& opts = {});

Trajectory run(const ProblemSpec& problem, const TimeGrid& grid, const Mesh& mesh0,
               const MeshSchedule& schedule = {}, const StepperOptions& opts = {});

/// 1/2 |dU^n|^2 + 1/2 a(U^n, U^n).
double discrete_energy(const Trajectory& traj, int n);

}  // namespace waveapost
