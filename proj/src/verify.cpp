#include "waveapost/verify.hpp"

#include "waveapost/quadrature.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

namespace waveapost {

CaseFunction CaseFunction::from_expression(const Expression& e) {
    return {[e](double x, double y, double t) { return e.eval<double>(x, y, t); },
            [e](const Jet3& x, const Jet3& y, const Jet3& t) { return e.eval<Jet3>(x, y, t); }};
}

CaseFunction CaseFunction::constant(double c) {
    return from([c](const auto&, const auto&, const auto&) { return c; });
}

Jet3 CaseFunction::derivatives(const Point& p, double t) const {
    return jet(Jet3::variable(p.x(), 0), Jet3::variable(p.y(), 1), Jet3::variable(t, 2));
}

ProblemSpec ManufacturedCase::problem() const {
    ProblemSpec spec;
    spec.domain = domain;
    spec.final_time = final_time;
    if (constant_a) {
        spec.a = Coefficient::constant(a.value(0.0, 0.0, 0.0));
    } else {
        Coefficient c;
        c.value = [fa = a](const Point& x) { return fa(x, 0.0); };
        c.gradient = [fa = a](const Point& x) {
            const Jet3 j = fa.derivatives(x, 0.0);
            return Point(j.g(0), j.g(1));
        };
        c.alpha_min = alpha_min;
        c.alpha_max = alpha_max;
        spec.a = std::move(c);
    }
    spec.f = [ff = f](const Point& x, double t) { return ff(x, t); };
    spec.u0 = [fu = u](const Point& x) { return fu(x, 0.0); };
    spec.u1 = [fu = u](const Point& x) { return fu.derivatives(x, 0.0).g(2); };
    spec.exact_u = [fu = u](const Point& x, double t) { return fu(x, t); };
    spec.exact_ut = [fu = u](const Point& x, double t) { return fu.derivatives(x, t).g(2); };
    return spec;
}

double ManufacturedCase::residual_check(int samples, unsigned seed) const {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, domain.lx), uy(0.0, domain.ly), ut(0.0, final_time);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Point x(ux(rng), domain.dim() == 2 ? uy(rng) : 0.0);
        const double t = ut(rng);
        const Jet3 ju = u.derivatives(x, t);
        const Jet3 ja = a.derivatives(x, t);
        double div = ja.v * ju.h(0, 0) + ja.g(0) * ju.g(0);
        if (domain.dim() == 2) div += ja.v * ju.h(1, 1) + ja.g(1) * ju.g(1);
        const double fv = f(x, t);
        const double res = ju.h(2, 2) - div - fv;
        const double scale = std::max({1.0, std::abs(ju.h(2, 2)), std::abs(div), std::abs(fv)});
        worst = std::max(worst, std::abs(res) / scale);
    }
    return worst;
}

ManufacturedCase checked(ManufacturedCase c, double tol) {
    const double r = c.residual_check();
    if (!(r <= tol))
        throw std::logic_error("manufactured case '" + c.name + "' fails its residual check (" + std::to_string(r) + ")");
    return c;
}

std::vector<std::string> builtin_case_names() { return {"zero", "sine1d", "variable1d", "forced1d", "sine2d"}; }

ManufacturedCase builtin_case(const std::string& name) {
    using std::sin, std::cos;
    constexpr double pi = std::numbers::pi;
    ManufacturedCase c;
    c.name = name;
    c.domain = Domain::interval(1.0);
    c.a = CaseFunction::constant(1.0);
    if (name == "zero") {
        c.description = "u = 0, f = 0";
        c.u = CaseFunction::constant(0.0);
        c.f = CaseFunction::constant(0.0);
    } else if (name == "sine1d") {
        c.description = "u = sin(pi x) sin(pi t), a = 1, f = 0";
        c.u = CaseFunction::from([](const auto& x, const auto&, const auto& t) { return sin(pi * x) * sin(pi * t); });
        c.f = CaseFunction::constant(0.0);
    } else if (name == "variable1d") {
        c.description = "u = sin(pi x) sin(pi t), a = 1 + x";
        c.u = CaseFunction::from([](const auto& x, const auto&, const auto& t) { return sin(pi * x) * sin(pi * t); });
        c.a = CaseFunction::from([](const auto& x, const auto&, const auto&) { return 1.0 + x; });
        c.f = CaseFunction::from([](const auto& x, const auto&, const auto& t) {
            return x * (pi * pi) * sin(pi * x) * sin(pi * t) - pi * cos(pi * x) * sin(pi * t);
        });
        c.constant_a = false;
        c.alpha_min = 1.0;
        c.alpha_max = 2.0;
    } else if (name == "forced1d") {
        c.description = "u = sin(pi x) cos(2 pi t), a = 1";
        c.u = CaseFunction::from([](const auto& x, const auto&, const auto& t) { return sin(pi * x) * cos(2.0 * pi * t); });
        c.f = CaseFunction::from([](const auto& x, const auto&, const auto& t) {
            return -3.0 * pi * pi * sin(pi * x) * cos(2.0 * pi * t);
        });
    } else if (name == "sine2d") {
        c.description = "u = sin(pi x) sin(pi y) sin(pi t), a = 1";
        c.domain = Domain::rectangle(1.0, 1.0);
        c.u = CaseFunction::from(
            [](const auto& x, const auto& y, const auto& t) { return sin(pi * x) * sin(pi * y) * sin(pi * t); });
        c.f = CaseFunction::from([](const auto& x, const auto& y, const auto& t) {
            return pi * pi * sin(pi * x) * sin(pi * y) * sin(pi * t);
        });
    } else {
        throw std::invalid_argument("unknown case '" + name + "'");
    }
    return checked(std::move(c));
}

double exact_error_linf_l2(const Trajectory& traj, const SpaceTimeFn& u_exact, int quad_degree) {
    const int qd = quad_degree < 0 ? 2 * traj.options.degree + 4 : quad_degree;
    const auto rule = gauss_legendre<double>(4);
    std::unique_ptr<FieldSampler> sampler;
    double worst = 0.0;
    const auto sample = [&](const Field& uh, const Mesh& fallback, double t) {
        const std::array<Field, 1> one{uh};
        const Mesh m = quadrature_mesh(one, fallback);
        if (!sampler || !(sampler->mesh() == m)) sampler = std::make_unique<FieldSampler>(m, qd);
        const Vector diff = sampler->values(uh) - sampler->values([&](const Point& x) { return u_exact(x, t); });
        worst = std::max(worst, std::sqrt(sampler->weights().dot(diff.cwiseAbs2())));
    };
    sample(Field(traj[0].U), traj[0].mesh(), 0.0);
    for (int n = 1; n <= traj.steps(); ++n) {
        const double k = traj.grid.k(n);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = traj.grid.t(n - 1) + rule.points[q](0) * k;
            sample(eval_U_hat_on(traj, n, t, 0), traj[n].mesh(), t);
        }
        sample(Field(traj[n].U), traj[n].mesh(), traj.grid.t(n));
    }
    return worst;
}

std::optional<double> effectivity(double total, double error) {
    if (!(error > 0)) return std::nullopt;
    return total / error;
}

std::vector<std::optional<double>> eoc(const std::vector<double>& values, const std::vector<double>& sizes) {
    if (values.size() != sizes.size()) throw std::invalid_argument("eoc: size mismatch");
    std::vector<std::optional<double>> out(values.size());
    for (std::size_t l = 1; l < values.size(); ++l) {
        if (values[l - 1] > 0 && values[l] > 0 && sizes[l - 1] > 0 && sizes[l] > 0 && sizes[l - 1] != sizes[l])
            out[l] = std::log(values[l - 1] / values[l]) / std::log(sizes[l - 1] / sizes[l]);
    }
    return out;
}

void fill_orders(std::vector<ConvergenceRow>& rows) {
    std::vector<double> h, err, tot;
    for (const auto& r : rows) {
        h.push_back(r.h);
        err.push_back(r.error.value_or(0.0));
        tot.push_back(r.bound.total);
    }
    const auto e = eoc(err, h);
    const auto t = eoc(tot, h);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].eoc_error = e[i];
        rows[i].eoc_total = t[i];
        rows[i].effectivity = rows[i].error ? effectivity(rows[i].bound.total, *rows[i].error) : std::nullopt;
    }
}

std::vector<ConvergenceRow> convergence_study(const ProblemSpec& problem, const StudySettings& s) {
    if (s.levels < 2) throw std::invalid_argument("a convergence study needs at least two levels");
    std::vector<ConvergenceRow> rows;
    for (int level = 0; level < s.levels; ++level) {
        const int n = s.base_n << level;
        const int steps = s.base_steps << level;
        const Mesh mesh = uniform_mesh(problem.domain, n);
        const TimeGrid grid = TimeGrid::uniform(problem.final_time, steps);
        const MeshSchedule schedule = s.schedule ? s.schedule(grid) : MeshSchedule{};
        const Trajectory traj = run(problem, grid, mesh, schedule, s.stepper);
        ConvergenceRow row;
        row.level = level;
        row.h = mesh.max_diameter();
        row.k = grid.max_step();
        if (problem.has_exact()) row.error = exact_error_linf_l2(traj, problem.exact_u);
        row.bound = total_bound(traj, s.estimator);
        rows.push_back(std::move(row));
    }
    fill_orders(rows);
    return rows;
}

double calibrate_c_el(double total, double error, double c_el, double slope) {
    if (total >= error || !(slope > 0)) return c_el;
    return c_el + (error - total) / slope;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << "level,h,k,error,eta1,eta2,eta3,eta4,delta1,delta2,E0,init_u0,init_u1,total,effectivity,eoc_error,eoc_total\n";
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::scientific << std::setprecision(10);
    const auto opt = [&os](const std::optional<double>& v) {
        if (v)
            os << *v;
        else
            os << "NA";
    };
    for (const auto& r : rows) {
        const auto& b = r.bound;
        os << r.level << ',' << r.h << ',' << r.k << ',';
        opt(r.error);
        os << ',' << b.eta1() << ',' << b.eta2 << ',' << b.eta3 << ',' << b.eta4 << ',' << b.delta1 << ',' << b.delta2
           << ',' << b.E0 << ',' << b.init_u0 << ',' << b.init_u1 << ',' << b.total << ',';
        opt(r.effectivity);
        os << ',';
        opt(r.eoc_error);
        os << ',';
        opt(r.eoc_total);
        os << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

}  // namespace waveapost
