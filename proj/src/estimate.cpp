#include "waveapost/estimate.hpp"

#include "waveapost/quadrature.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace waveapost {

namespace {

int space_degree(const Trajectory& traj, const EstimatorConfig& cfg) {
    return cfg.space_quad_degree < 0 ? default_quad_degree(traj.options.degree) : cfg.space_quad_degree;
}

bool is_zero(const Field& f) {
    if (f.has_analytic_part()) {
        for (const auto& t : f.analytic_terms())
            if (t.weight != 0.0) return false;
    }
    for (const auto& u : f.fe_terms())
        if (!u.coefficients().isZero(0.0)) return false;
    return true;
}

/// Values of several fields at the quadrature points of their common mesh.
struct Samples {
    FieldSampler sampler;
    Eigen::MatrixXd values;

    Samples(std::span<const Field> fields, const Mesh& fallback, int degree)
        : sampler(quadrature_mesh(fields, fallback), degree),
          values(static_cast<Eigen::Index>(sampler.size()), static_cast<Eigen::Index>(fields.size())) {
        for (std::size_t i = 0; i < fields.size(); ++i) values.col(static_cast<Eigen::Index>(i)) = sampler.values(fields[i]);
    }

    double norm(const Eigen::VectorXd& combo) const {
        const Vector v = values * combo;
        return std::sqrt(std::max(0.0, sampler.weights().dot(v.cwiseAbs2())));
    }
};

/// Length of the edge of `g` that contains the segment x0-x1, or the diameter.
double containing_edge_length(const ElementGeometry& g, const Point& x0, const Point& x1) {
    static constexpr int edges[3][2] = {{0, 1}, {1, 2}, {0, 2}};
    for (const auto& e : edges) {
        const Point a = g.x[static_cast<std::size_t>(e[0])];
        const Point d = g.x[static_cast<std::size_t>(e[1])] - a;
        const double len = d.norm();
        const auto on_edge = [&](const Point& p) {
            const Point w = p - a;
            const double cross = d.x() * w.y() - d.y() * w.x();
            const double s = d.dot(w) / (len * len);
            return std::abs(cross) <= 1e-10 * len * len && s >= -1e-10 && s <= 1.0 + 1e-10;
        };
        if (on_edge(x0) && on_edge(x1)) return len;
    }
    return g.diameter;
}

double data_norm(const SharedFn& f, const SharedFn& g, const Mesh& mesh, int degree) {
    if (f == g) return 0.0;
    return l2_norm(Field::analytic(f) - Field::analytic(g), mesh, degree);
}

}  // namespace

EllipticResidual elliptic_residual(const Field& z, const Field& r, const Mesh& h_mesh, const Coefficient& a,
                                   int quad_degree) {
    if (z.has_analytic_part()) throw std::invalid_argument("elliptic_residual: Z must be a finite element field");
    const int p = std::max({1, z.fe_degree(), r.fe_degree()});
    const int qd = quad_degree < 0 ? default_quad_degree(p) : quad_degree;

    std::vector<Mesh> meshes{h_mesh};
    for (const Field* f : {&z, &r})
        for (auto& m : f->meshes()) meshes.push_back(m);
    const Mesh eval = common_refinement(meshes);

    EllipticResidual out{0.0, h_mesh, std::vector<double>(static_cast<std::size_t>(h_mesh.num_elements()), 0.0)};
    const int ne = eval.num_elements();
    std::vector<int> to_h(static_cast<std::size_t>(ne));
    const auto zt = z.fe_terms();
    std::vector<std::vector<int>> to_z(zt.size(), std::vector<int>(static_cast<std::size_t>(ne)));
    for (int e = 0; e < ne; ++e) {
        const ElemId id = eval.element_id(e);
        to_h[static_cast<std::size_t>(e)] = h_mesh.find_ancestor(id);
        for (std::size_t c = 0; c < zt.size(); ++c) to_z[c][static_cast<std::size_t>(e)] = zt[c].space().mesh().find_ancestor(id);
    }
    const auto z_gradient = [&](int e, const Point& x) {
        Point g = Point::Zero();
        for (std::size_t c = 0; c < zt.size(); ++c) g += zt[c].gradient_at(to_z[c][static_cast<std::size_t>(e)], x);
        return g;
    };

    const FieldSampler sampler(eval, qd);
    const Vector rv = sampler.values(r);
    for (std::size_t q = 0; q < sampler.size(); ++q) {
        const int e = sampler.point_elements()[q];
        const Point& x = sampler.points()[q];
        double lap = 0.0;
        for (std::size_t c = 0; c < zt.size(); ++c) lap += zt[c].laplacian(to_z[c][static_cast<std::size_t>(e)]);
        double res = rv(static_cast<Eigen::Index>(q)) + a(x) * lap;
        if (!a.is_constant() && !zt.empty()) res += a.grad(x).dot(z_gradient(e, x));
        const int hk = to_h[static_cast<std::size_t>(e)];
        const double h = h_mesh.diameter(hk);
        out.element_sq[static_cast<std::size_t>(hk)] += h * h * h * h * sampler.weights()(static_cast<Eigen::Index>(q)) * res * res;
    }

    if (!zt.empty()) {
        const auto line = gauss_legendre<double>(std::max(1, (qd + 2) / 2));
        for (const Facet& f : eval.facets()) {
            if (!f.interior()) continue;
            const int hl = to_h[static_cast<std::size_t>(f.left)];
            const int hr = to_h[static_cast<std::size_t>(f.right)];
            const Point x0 = eval.vertex(f.v[0]);
            double integral = 0.0;
            double he = 0.0;
            if (eval.dim() == 1) {
                const Point n(1.0, 0.0);
                const double jump = a(x0) * (z_gradient(f.left, x0) - z_gradient(f.right, x0)).dot(n);
                integral = jump * jump;
                he = hl == hr ? h_mesh.diameter(hl) : 0.5 * (h_mesh.diameter(hl) + h_mesh.diameter(hr));
            } else {
                const Point x1 = eval.vertex(f.v[1]);
                const Point d = x1 - x0;
                const double len = d.norm();
                const Point n = Point(d.y(), -d.x()) / len;
                for (std::size_t q = 0; q < line.size(); ++q) {
                    const Point x = x0 + line.points[q](0) * d;
                    const double jump = a(x) * (z_gradient(f.left, x) - z_gradient(f.right, x)).dot(n);
                    integral += line.weights[q] * len * jump * jump;
                }
                he = hl == hr ? h_mesh.diameter(hl) : containing_edge_length(h_mesh.geometry(hl), x0, x1);
            }
            const double contribution = he * he * he * integral;
            out.element_sq[static_cast<std::size_t>(hl)] += 0.5 * contribution;
            out.element_sq[static_cast<std::size_t>(hr)] += 0.5 * contribution;
        }
    }

    double sum = 0.0;
    for (double v : out.element_sq) sum += v;
    out.value = std::sqrt(sum);
    return out;
}

Eta1 eta1(const Trajectory& traj, const EstimatorConfig& cfg) {
    const int N = traj.steps();
    const int qd = space_degree(traj, cfg);
    const auto rule = gauss_legendre<double>(cfg.time_quad_points);
    const auto& solver = traj.options.solver;
    Eta1 out;

    for (int j = 1; j <= N; ++j) {
        const FeSpace& space = traj[j].space;
        const std::array<Field, 2> res{traj[j].dU - Field(l2_project(traj[j].dU, space, qd, solver)),
                                       traj[j - 1].dU - Field(l2_project(traj[j - 1].dU, space, qd, solver))};
        if (is_zero(res[0]) && is_zero(res[1])) continue;
        const Samples s(res, traj[j].mesh(), qd);
        const double k = traj.grid.k(j);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double sq = rule.points[q](0) * k;
            const double rq = k - sq;
            const double beta = (rq * rq - 2.0 * sq * rq) / (k * k);
            out.first += k * rule.weights[q] * s.norm(Eigen::Vector2d(1.0 - beta, beta));
        }
    }

    const double T = traj.grid.final_time();
    for (int j = 1; j < N; ++j) {
        const Field diff = Field(l2_project(traj[j].dU, traj[j + 1].space, qd, solver)) -
                           Field(l2_project(traj[j].dU, traj[j].space, qd, solver));
        if (!is_zero(diff)) out.second += (T - traj.grid.t(j)) * l2_norm(diff, qd);
    }
    const Field v0 = traj[0].dU - Field(l2_project(traj[0].dU, traj[0].space, qd, solver));
    if (!is_zero(v0)) out.second += T * l2_norm(v0, traj[0].mesh(), qd);
    return out;
}

double eta2(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg) {
    const int N = traj.steps();
    const int qd = space_degree(traj, cfg);
    const auto rule = gauss_legendre<double>(cfg.time_quad_points);
    double sum = 0.0;
    for (int j = 1; j <= N; ++j) {
        const auto i = static_cast<std::size_t>(j);
        const std::array<Field, 3> fields{data.dg[i], data.d2g[i], data.gamma[i]};
        if (is_zero(fields[0]) && is_zero(fields[1]) && is_zero(fields[2])) continue;
        const Samples s(fields, traj[j].mesh(), qd);
        const double k = traj.grid.k(j);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double r = k - rule.points[q](0) * k;
            const Eigen::Vector3d c(0.5 * r * r, -(r * r * r * r / (4.0 * k) - r * r * r / 3.0), -1.0);
            sum += k * rule.weights[q] * s.norm(c);
        }
    }
    return sum;
}

double eta3(const Trajectory& traj, const EstimatorConfig& cfg) {
    const int N = traj.steps();
    const int qd = space_degree(traj, cfg);
    const auto rule = gauss_legendre<double>(cfg.time_quad_points);
    double sum = 0.0;
    for (int j = 1; j <= N; ++j) {
        const FieldSampler sampler(traj[j].mesh(), qd);
        const Vector fbar = sampler.values(*traj.f_bar[static_cast<std::size_t>(j)]);
        const double k = traj.grid.k(j);
        double integral = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = traj.grid.t(j - 1) + rule.points[q](0) * k;
            const Vector ft = sampler.values([&](const Point& x) { return traj.problem.f(x, t); });
            integral += k * rule.weights[q] * sampler.weights().dot((fbar - ft).cwiseAbs2());
        }
        const double term = std::sqrt(k * k * k * integral);
        sum += j < N ? term / (2.0 * std::numbers::pi) : term;
    }
    return sum;
}

std::vector<double> eta4_interval_terms(const Trajectory& traj, const EstimatorConfig& cfg) {
    const int N = traj.steps();
    const int qd = space_degree(traj, cfg);
    const auto rule = gauss_legendre<double>(cfg.time_quad_points);
    std::vector<double> terms;
    for (int j = 1; j <= N; ++j) {
        const std::array<Field, 1> d2{second_difference(traj, j)};
        if (is_zero(d2[0])) {
            terms.push_back(0.0);
            continue;
        }
        const Samples s(d2, traj[j].mesh(), qd);
        const double k = traj.grid.k(j);
        double integral = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = traj.grid.t(j - 1) + rule.points[q](0) * k;
            const double n = s.norm(Eigen::VectorXd::Constant(1, mu(traj.grid, j, t)));
            integral += k * rule.weights[q] * n * n;
        }
        terms.push_back(std::sqrt(k * k * k * integral));
    }
    return terms;
}

double eta4(const Trajectory& traj, const EstimatorConfig& cfg) {
    const auto terms = eta4_interval_terms(traj, cfg);
    double sum = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i)
        sum += i + 1 < terms.size() ? terms[i] / (2.0 * std::numbers::pi) : terms[i];
    return sum;
}

EllipticResidual step_residual(const Trajectory& traj, const GData& data, int j, const EstimatorConfig& cfg) {
    const auto i = static_cast<std::size_t>(j);
    const Field r = Field(data.AU[i]) - Field(data.Pf[i]) + Field::analytic(traj.load(j));
    return elliptic_residual(traj[j].U, r, traj[j].mesh(), traj.problem.a, space_degree(traj, cfg));
}

EllipticResidual initial_velocity_residual(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg) {
    return elliptic_residual(traj[0].dU, data.dg[0], traj[0].mesh(), traj.problem.a, space_degree(traj, cfg));
}

EllipticResidual difference_residual(const Trajectory& traj, const GData& data, int j, const EstimatorConfig& cfg) {
    if (j < 1 || j > traj.steps()) throw std::out_of_range("difference_residual: step out of range");
    const auto i = static_cast<std::size_t>(j);
    const double k = traj.grid.k(j);
    const Field r = (Field(data.AU[i]) - Field(data.AU[i - 1]) - Field(data.Pf[i]) + Field(data.Pf[i - 1]) +
                     Field::analytic(traj.load(j)) - Field::analytic(traj.load(j - 1))) /
                    k;
    const Mesh coarse = finest_common_coarsening(traj[j].mesh(), traj[j - 1].mesh());
    return elliptic_residual(traj[j].dU, r, coarse, traj.problem.a, space_degree(traj, cfg));
}

double c_omega(const Trajectory& traj, const EstimatorConfig& cfg) {
    return cfg.c_omega ? *cfg.c_omega : traj.problem.domain.poincare_constant();
}

double alpha_min(const Trajectory& traj, const EstimatorConfig& cfg) {
    return cfg.alpha_min > 0 ? cfg.alpha_min : traj.problem.a.alpha_min;
}

namespace {

double delta1_from(const Trajectory& traj, const EstimatorConfig& cfg, double e_v0,
                   const std::vector<EllipticResidual>& residuals) {
    const int N = traj.steps();
    const int qd = space_degree(traj, cfg);
    double ratio = 1.0;
    if (N >= 2) {
        ratio = 0.0;
        for (int j = 2; j <= N; ++j) ratio = std::max(ratio, traj.grid.k(j) / traj.grid.k(j - 1));
    }
    const double data_weight = c_omega(traj, cfg) / alpha_min(traj, cfg);
    double worst = 0.0;
    for (int j = 0; j <= N; ++j) {
        const auto i = static_cast<std::size_t>(j);
        const double osc = data_norm(traj.f_bar[i], traj.load(j), traj[j].mesh(), qd);
        worst = std::max(worst, cfg.c_el * residuals[i].value + data_weight * osc);
    }
    const double first = 8.0 * traj.grid.k(1) / 27.0 * cfg.c_el * e_v0;
    return std::max(first, (35.0 / 27.0 + 31.0 / 27.0 * ratio) * worst);
}

double delta2_from(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg, double e_v0) {
    const int N = traj.steps();
    const int qd = space_degree(traj, cfg);
    const double data_weight = c_omega(traj, cfg) / alpha_min(traj, cfg);
    const auto k = [&](int j) { return j < 1 || j > N ? 0.0 : traj.grid.k(j); };
    double sum = k(1) * cfg.c_el * e_v0;
    for (int j = 1; j <= N; ++j) {
        const auto i = static_cast<std::size_t>(j);
        const Field osc = (Field::analytic(traj.load(j)) - Field::analytic(traj.load(j - 1)) -
                           Field::analytic(traj.f_bar[i]) + Field::analytic(traj.f_bar[i - 1])) /
                          k(j);
        const double osc_norm = is_zero(osc) ? 0.0 : l2_norm(osc, traj[j].mesh(), qd);
        const double e = difference_residual(traj, data, j, cfg).value;
        sum += (2.0 * k(j) + k(j + 1)) * (cfg.c_el * e + data_weight * osc_norm);
    }
    return 2.0 / 3.0 * sum;
}

std::vector<EllipticResidual> step_residuals(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg) {
    std::vector<EllipticResidual> out;
    out.reserve(static_cast<std::size_t>(traj.steps()) + 1);
    for (int j = 0; j <= traj.steps(); ++j) out.push_back(step_residual(traj, data, j, cfg));
    return out;
}

}  // namespace

double delta1(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg) {
    return delta1_from(traj, cfg, initial_velocity_residual(traj, data, cfg).value, step_residuals(traj, data, cfg));
}

double delta2(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg) {
    return delta2_from(traj, data, cfg, initial_velocity_residual(traj, data, cfg).value);
}

double EstimatorBreakdown::assemble() const {
    return delta1 + E0_term + init_u0_term + 2.0 * delta2 + 2.0 * eta_sum() + init_u1_term;
}

EstimatorBreakdown total_bound(const Trajectory& traj, const EstimatorConfig& cfg) {
    return total_bound(traj, build_g_data(traj), cfg);
}

EstimatorBreakdown total_bound(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg) {
    const int qd = space_degree(traj, cfg);
    EstimatorBreakdown b;
    b.C_el = cfg.c_el;
    b.C_omega = c_omega(traj, cfg);
    b.alpha_min = alpha_min(traj, cfg);
    if (!(b.C_omega > 0) || !(b.alpha_min > 0)) throw std::invalid_argument("estimator constants must be positive");

    const Eta1 e1 = eta1(traj, cfg);
    b.eta1_1 = e1.first;
    b.eta1_2 = e1.second;
    b.eta2 = eta2(traj, data, cfg);
    b.eta3 = eta3(traj, cfg);
    b.eta4 = eta4(traj, cfg);

    b.step_residuals = step_residuals(traj, data, cfg);
    const double e_v0 = initial_velocity_residual(traj, data, cfg).value;
    b.delta1 = delta1_from(traj, cfg, e_v0, b.step_residuals);
    b.delta2 = delta2_from(traj, data, cfg, e_v0);

    b.E0 = b.step_residuals.front().value;
    b.E0_term = std::numbers::sqrt2 * cfg.c_el * b.E0;
    const Mesh& mesh0 = traj[0].mesh();
    b.init_u0 = l2_norm(Field(traj[0].U) - Field::analytic(make_shared_fn(traj.problem.u0)), mesh0, qd);
    b.init_u0_term = std::numbers::sqrt2 * b.init_u0;
    b.init_u1 = l2_norm(traj[0].dU - Field::analytic(make_shared_fn(traj.problem.u1)), mesh0, qd);
    b.C_aN = std::min(2.0 * traj.grid.final_time(), std::sqrt(2.0 * b.C_omega / b.alpha_min));
    b.init_u1_term = b.C_aN * b.init_u1;
    b.total = b.assemble();
    return b;
}

void write_breakdown_csv(std::ostream& os, const EstimatorBreakdown& b, bool header) {
    if (header)
        os << "eta1_1,eta1_2,eta2,eta3,eta4,delta1,delta2,E0,E0_term,init_u0,init_u0_term,init_u1,init_u1_term,"
              "C_aN,C_el,C_omega,alpha_min,total\n";
    const double row[] = {b.eta1_1, b.eta1_2, b.eta2,    b.eta3,         b.eta4,    b.delta1,
                          b.delta2, b.E0,     b.E0_term, b.init_u0,      b.init_u0_term, b.init_u1,
                          b.init_u1_term, b.C_aN, b.C_el, b.C_omega, b.alpha_min, b.total};
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::scientific << std::setprecision(10);
    for (std::size_t i = 0; i < std::size(row); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
    os.flags(flags);
    os.precision(prec);
}

void write_element_map(std::ostream& os, const EstimatorBreakdown& b) {
    os << "# step element cx cy value_sq\n";
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(12);
    for (std::size_t j = 0; j < b.step_residuals.size(); ++j) {
        const auto& r = b.step_residuals[j];
        for (int e = 0; e < r.mesh.num_elements(); ++e) {
            const Point c = r.mesh.geometry(e).centroid();
            os << j << ' ' << r.mesh.element_id(e) << ' ' << c.x() << ' ' << c.y() << ' '
               << r.element_sq[static_cast<std::size_t>(e)] << '\n';
        }
    }
    os.flags(flags);
    os.precision(prec);
}

}  // namespace waveapost
