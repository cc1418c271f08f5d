#include "waveapost/stepper.hpp"

#include "waveapost/quadrature.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace waveapost {

void ProblemSpec::validate() const {
    if (!(final_time > 0)) throw std::invalid_argument("final time must be positive");
    if (!f || !u0 || !u1 || !a.value) throw std::invalid_argument("problem data callbacks are missing");
    if (!(a.alpha_min > 0) || a.alpha_max < a.alpha_min) throw std::invalid_argument("invalid coefficient bounds");
}

TimeGrid::TimeGrid(std::vector<double> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw std::invalid_argument("time grid needs at least one step");
    if (knots_.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (!(knots_[i] > knots_[i - 1])) throw std::invalid_argument("time knots must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double final_time, int steps) {
    if (steps < 1 || !(final_time > 0)) throw std::invalid_argument("uniform grid needs T > 0 and N >= 1");
    std::vector<double> knots(static_cast<std::size_t>(steps) + 1);
    for (int n = 0; n <= steps; ++n) knots[static_cast<std::size_t>(n)] = final_time * n / steps;
    knots.back() = final_time;
    return TimeGrid(std::move(knots));
}

double TimeGrid::max_step() const {
    double k = 0.0;
    for (int n = 1; n <= steps(); ++n) k = std::max(k, this->k(n));
    return k;
}

int TimeGrid::interval_of(double t) const {
    if (t < 0.0 || t > final_time()) throw std::out_of_range("time outside [0, T]");
    if (t == 0.0) return 0;
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
    return static_cast<int>(it - knots_.begin());
}

Mesh MeshSchedule::apply(int step, const Mesh& previous) const {
    const auto it = actions_.find(step);
    if (it == actions_.end()) return previous;
    Mesh mesh = previous;
    for (const auto& action : it->second) {
        const auto marked = elements_in_box(mesh, action.lo, action.hi);
        mesh = action.kind == MeshAction::Kind::Refine ? refine(mesh, marked) : coarsen(mesh, marked);
    }
    return mesh;
}

const SharedFn& Trajectory::load(int n) const {
    if (options.load == LoadMode::Average) return f_bar[static_cast<std::size_t>(n)];
    return f_knot[static_cast<std::size_t>(n)];
}

SharedFn time_average(const SpaceTimeFn& f, double t0, double t1, int points) {
    const auto rule = gauss_legendre<double>(points);
    std::vector<double> times, weights;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        times.push_back(t0 + rule.points[q](0) * (t1 - t0));
        weights.push_back(rule.weights[q]);
    }
    return make_shared_fn([f, times = std::move(times), weights = std::move(weights)](const Point& x) {
        double v = 0.0;
        for (std::size_t q = 0; q < times.size(); ++q) v += weights[q] * f(x, times[q]);
        return v;
    });
}

SharedFn at_time(const SpaceTimeFn& f, double t) {
    return make_shared_fn([f, t](const Point& x) { return f(x, t); });
}

StepRecord initialize(const ProblemSpec& problem, const Mesh& mesh0, const StepperOptions& opts) {
    FeSpace space(mesh0, opts.degree);
    FeFunction u0 = l2_project(problem.u0, space, opts.space_degree(), opts.solver);
    FeFunction v0 = l2_project(problem.u1, space, opts.space_degree(), opts.solver);
    return StepRecord{0, 0.0, 0.0, space, std::move(u0), Field(v0)};
}

namespace {

/// Factorised (M / k^2 + K) for one space and step size.
struct StepOperator {
    FeSpace space;
    double k = 0.0;
    SparseMatrix system;
    Eigen::SimplicialLLT<SparseMatrix> llt;

    StepOperator(const FeSpace& s, double k_n, const Coefficient& a)
        : space(s), k(k_n), system(s.mass() / (k_n * k_n) + assemble_stiffness(s, a)) {
        if (system.rows() > 0) llt.compute(system);
    }

    Vector solve(const Vector& rhs, const SolverOptions& opts) const {
        if (rhs.size() == 0) return Vector();
        if (opts.method == SolverOptions::Method::ConjugateGradient) return solve_spd(system, rhs, opts);
        if (rhs.isZero(0.0)) return Vector::Zero(rhs.size());
        Vector x = llt.solve(rhs);
        double res = (system * x - rhs).norm() / rhs.norm();
        if (!(res <= opts.tolerance)) {
            x += llt.solve(rhs - system * x);
            res = (system * x - rhs).norm() / rhs.norm();
            if (!(res <= opts.tolerance)) throw SolverError("step solve missed the residual tolerance", res);
        }
        return x;
    }
};

StepRecord advance(const StepRecord& prev, const FeSpace& space, const StepOperator& op, double t_n, double k_n,
                   const SharedFn& load, const StepperOptions& opts) {
    const Field history = (1.0 / (k_n * k_n)) * Field(prev.U) + (1.0 / k_n) * prev.dU;
    Vector rhs = load_vector(history, space) + load_vector(space, *load, opts.space_degree());
    FeFunction u(space, op.solve(rhs, opts.solver));
    Field du = (Field(u) - Field(prev.U)) / k_n;
    return StepRecord{prev.n + 1, t_n, k_n, space, std::move(u), std::move(du)};
}

}  // namespace

StepRecord step(const StepRecord& previous, const Mesh& mesh_n, double t_n, double k_n, const SharedFn& load,
                const Coefficient& a, const StepperOptions& opts) {
    if (!mesh_n.same_forest(previous.mesh())) throw IncompatibleMeshes("step: mesh is not compatible with the previous one");
    if (!(k_n > 0)) throw std::invalid_argument("step: k must be positive");
    FeSpace space = mesh_n == previous.mesh() && previous.space.degree() == opts.degree ? previous.space
                                                                                      : FeSpace(mesh_n, opts.degree);
    StepOperator op(space, k_n, a);
    return advance(previous, space, op, t_n, k_n, load, opts);
}

Trajectory run(const ProblemSpec& problem, const TimeGrid& grid, const Mesh& mesh0, const MeshSchedule& schedule,
               const StepperOptions& opts) {
    problem.validate();
    if (mesh0.domain().kind != problem.domain.kind) throw std::invalid_argument("mesh and problem domains differ");
    Trajectory traj{problem, grid, opts, {}, {}, {}};
    const int N = grid.steps();
    traj.f_knot.reserve(static_cast<std::size_t>(N) + 1);
    traj.f_bar.reserve(static_cast<std::size_t>(N) + 1);
    traj.f_knot.push_back(at_time(problem.f, 0.0));
    traj.f_bar.push_back(traj.f_knot.front());
    for (int n = 1; n <= N; ++n) {
        traj.f_knot.push_back(at_time(problem.f, grid.t(n)));
        traj.f_bar.push_back(time_average(problem.f, grid.t(n - 1), grid.t(n), opts.time_quad_points));
    }

    traj.records.reserve(static_cast<std::size_t>(N) + 1);
    traj.records.push_back(initialize(problem, mesh0, opts));
    std::unique_ptr<StepOperator> op;
    for (int n = 1; n <= N; ++n) {
        const StepRecord& prev = traj.records.back();
        const Mesh mesh = schedule.apply(n, prev.mesh());
        const FeSpace space = mesh == prev.mesh() ? prev.space : FeSpace(mesh, opts.degree);
        const double k = grid.k(n);
        if (!op || !op->space.same_as(space) || std::abs(op->k - k) > 1e-15 * k)
            op = std::make_unique<StepOperator>(space, k, problem.a);
        traj.records.push_back(advance(prev, space, *op, grid.t(n), k, traj.load(n), opts));
    }
    return traj;
}

double discrete_energy(const Trajectory& traj, int n) {
    const StepRecord& rec = traj[n];
    const double kinetic = l2_norm(rec.dU);
    const SparseMatrix k = assemble_stiffness(rec.space, traj.problem.a);
    const Vector& u = rec.U.coefficients();
    return 0.5 * kinetic * kinetic + 0.5 * u.dot(k * u);
}

}  // namespace waveapost
