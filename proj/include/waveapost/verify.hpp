#pragma once

#include "waveapost/estimate.hpp"
#include "waveapost/expression.hpp"
#include "waveapost/jet.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace waveapost {

/// Function of (x, y, t) usable both with doubles and with Jet numbers.
struct CaseFunction {
    std::function<double(double, double, double)> value;
    std::function<Jet3(const Jet3&, const Jet3&, const Jet3&)> jet;

    template <typename F>
    static CaseFunction from(F f) {
        return {[f](double x, double y, double t) { return static_cast<double>(f(x, y, t)); },
                [f](const Jet3& x, const Jet3& y, const Jet3& t) { return Jet3(f(x, y, t)); }};
    }
    static CaseFunction from_expression(const Expression& e);
    static CaseFunction constant(double c);

    double operator()(const Point& p, double t) const { return value(p.x(), p.y(), t); }
    Jet3 derivatives(const Point& p, double t) const;
};

/// Problem with known solution u. The coefficient a ignores t.
struct ManufacturedCase {
    std::string name;
    std::string description;
    Domain domain;
    double final_time = 1.0;
    CaseFunction u;
    CaseFunction a;
    CaseFunction f;
    double alpha_min = 1.0;
    double alpha_max = 1.0;
    bool constant_a = true;

    ProblemSpec problem() const;
    /// Largest relative residual |u_tt - div(a grad u) - f| over random
    /// space-time samples.
    double residual_check(int samples = 64, unsigned seed = 7) const;
};

/// "zero", "sine1d", "variable1d", "forced1d", "sine2d".
std::vector<std::string> builtin_case_names();
/// Returns the named case after its residual check passed (std::logic_error otherwise).
ManufacturedCase builtin_case(const std::string& name);
ManufacturedCase checked(ManufacturedCase c, double tol = 1e-10);

/// Max over the knots and 4 Gauss points per interval of |U_hat(t) - u(t)|.
/// Quadrature degree defaults to 2p + 4.
double exact_error_linf_l2(const Trajectory& traj, const SpaceTimeFn& u_exact, int quad_degree = -1);

/// total / error; empty when error is zero.
std::optional<double> effectivity(double total, double error);
/// Orders log(q_{l-1}/q_l) / log(h_{l-1}/h_l); the first entry and entries with
/// non-positive data are empty.
std::vector<std::optional<double>> eoc(const std::vector<double>& values, const std::vector<double>& sizes);

struct ConvergenceRow {
    int level = 0;
    double h = 0.0;
    double k = 0.0;
    std::optional<double> error;
    EstimatorBreakdown bound;
    std::optional<double> effectivity;
    std::optional<double> eoc_error;
    std::optional<double> eoc_total;
};

struct StudySettings {
    int base_n = 8;      ///< mesh subdivisions on level 0
    int base_steps = 8;  ///< time steps on level 0
    int levels = 4;
    StepperOptions stepper;
    EstimatorConfig estimator;
    /// Optional schedule per level, built from the level's time grid.
    std::function<MeshSchedule(const TimeGrid&)> schedule;
};

/// Halves h and k per level and fills errors, bounds and orders.
std::vector<ConvergenceRow> convergence_study(const ProblemSpec& problem, const StudySettings& settings);
void fill_orders(std::vector<ConvergenceRow>& rows);

/// C_el making total >= error on `row`, the bound being affine in C_el above
/// `slope` = d total / d C_el. Returns the current C_el if already reliable.
double calibrate_c_el(double total, double error, double c_el, double slope);

/// Fixed columns: level,h,k,error,eta1,eta2,eta3,eta4,delta1,delta2,E0,init_u0,
/// init_u1,total,effectivity,eoc_error,eoc_total. Undefined values print NA.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

}  // namespace waveapost
