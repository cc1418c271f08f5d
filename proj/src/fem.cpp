#include "waveapost/fem.hpp"

#include "waveapost/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <map>
#include <mutex>
#include <ostream>

namespace waveapost {

namespace {

constexpr std::array<std::array<int, 2>, 3> kEdges2d{{{0, 1}, {1, 2}, {0, 2}}};

int num_local_edges(int dim) { return dim == 1 ? 1 : 3; }

std::array<int, 2> local_edge(int dim, int k) {
    if (dim == 1) return {0, 1};
    return kEdges2d[static_cast<std::size_t>(k)];
}

void check_degree(int degree) {
    if (degree != 1 && degree != 2) throw std::invalid_argument("only P1 and P2 spaces are supported");
}

using Triplet = Eigen::Triplet<double>;

}  // namespace

const ReferenceRule& reference_rule(int dim, int degree) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<ReferenceRule>> cache;
    degree = std::max(degree, 0);
    std::lock_guard lock(mutex);
    auto& slot = cache[{dim, degree}];
    if (!slot) {
        auto rule = std::make_unique<ReferenceRule>();
        if (dim == 1) {
            const auto g = line_rule_for_degree<double>(degree);
            for (std::size_t q = 0; q < g.size(); ++q) {
                const double s = g.points[q](0);
                rule->points.emplace_back(s, 0.0);
                rule->barycentric.emplace_back(1.0 - s, s, 0.0);
                rule->weights.push_back(g.weights[q]);
            }
        } else {
            const auto g = triangle_rule_for_degree<double>(degree);
            for (std::size_t q = 0; q < g.size(); ++q) {
                const double s = g.points[q](0), r = g.points[q](1);
                rule->points.emplace_back(s, r);
                rule->barycentric.emplace_back(1.0 - s - r, s, r);
                rule->weights.push_back(2.0 * g.weights[q]);
            }
        }
        slot = std::move(rule);
    }
    return *slot;
}

// ---------------------------------------------------------------------------

Coefficient Coefficient::constant(double c) {
    if (!(c > 0)) throw std::domain_error("coefficient must be positive");
    Coefficient a;
    a.value = [c](const Point&) { return c; };
    a.gradient = [](const Point&) { return Point::Zero().eval(); };
    a.alpha_min = c;
    a.alpha_max = c;
    a.constant_ = true;
    return a;
}

Point Coefficient::grad(const Point& x) const {
    if (gradient) return gradient(x);
    const double eps = 1e-6;
    const Point ex(eps, 0.0), ey(0.0, eps);
    return Point((value(x + ex) - value(x - ex)) / (2 * eps), (value(x + ey) - value(x - ey)) / (2 * eps));
}

// ---------------------------------------------------------------------------

int local_dof_count(int dim, int degree) {
    return degree == 1 ? dim + 1 : dim + 1 + num_local_edges(dim);
}

void shape_values(int dim, int degree, const Eigen::Vector3d& lam, Vector& out) {
    out.resize(local_dof_count(dim, degree));
    const int nv = dim + 1;
    if (degree == 1) {
        for (int i = 0; i < nv; ++i) out(i) = lam(i);
        return;
    }
    for (int i = 0; i < nv; ++i) out(i) = lam(i) * (2.0 * lam(i) - 1.0);
    for (int k = 0; k < num_local_edges(dim); ++k) {
        const auto [a, b] = local_edge(dim, k);
        out(nv + k) = 4.0 * lam(a) * lam(b);
    }
}

void shape_gradients(const ElementGeometry& g, int degree, const Eigen::Vector3d& lam,
                     Eigen::Matrix<double, 2, Eigen::Dynamic>& out) {
    const int dim = g.dim;
    const int nv = dim + 1;
    out.resize(2, local_dof_count(dim, degree));
    if (degree == 1) {
        for (int i = 0; i < nv; ++i) out.col(i) = g.grad_lambda[i];
        return;
    }
    for (int i = 0; i < nv; ++i) out.col(i) = (4.0 * lam(i) - 1.0) * g.grad_lambda[i];
    for (int k = 0; k < num_local_edges(dim); ++k) {
        const auto [a, b] = local_edge(dim, k);
        out.col(nv + k) = 4.0 * (lam(a) * g.grad_lambda[b] + lam(b) * g.grad_lambda[a]);
    }
}

void shape_laplacians(const ElementGeometry& g, int degree, Vector& out) {
    const int dim = g.dim;
    const int nv = dim + 1;
    out = Vector::Zero(local_dof_count(dim, degree));
    if (degree == 1) return;
    for (int i = 0; i < nv; ++i) out(i) = 4.0 * g.grad_lambda[i].squaredNorm();
    for (int k = 0; k < num_local_edges(dim); ++k) {
        const auto [a, b] = local_edge(dim, k);
        out(nv + k) = 8.0 * g.grad_lambda[a].dot(g.grad_lambda[b]);
    }
}

// ---------------------------------------------------------------------------

struct FeSpace::Cache {
    std::once_flag mass_once;
    SparseMatrix mass;
    Eigen::SimplicialLLT<SparseMatrix> llt;
};

FeSpace::FeSpace(Mesh mesh, int degree) : cache_(std::make_shared<Cache>()) {
    check_degree(degree);
    const int dim = mesh.dim();
    auto data = std::make_shared<Data>(Data{std::move(mesh), degree});
    const Mesh& m = data->mesh;
    data->dofs_per_element = local_dof_count(dim, degree);
    data->element_dofs.resize(static_cast<std::size_t>(m.num_elements() * data->dofs_per_element));

    std::unordered_map<VertexId, int> vertex_dof;
    std::map<std::pair<VertexId, VertexId>, int> edge_dof;
    int next = 0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto& el = m.element(e);
        auto* dofs = data->element_dofs.data() + e * data->dofs_per_element;
        for (int i = 0; i <= dim; ++i) {
            const VertexId v = el.v[i];
            auto [it, inserted] = vertex_dof.try_emplace(v, -1);
            if (inserted && !m.is_boundary_vertex(v)) {
                it->second = next++;
                data->nodes.push_back(m.vertex(v));
            }
            dofs[i] = it->second;
        }
        if (degree == 2) {
            for (int k = 0; k < num_local_edges(dim); ++k) {
                const auto [a, b] = local_edge(dim, k);
                const VertexId va = std::min(el.v[a], el.v[b]);
                const VertexId vb = std::max(el.v[a], el.v[b]);
                const Point mid = 0.5 * (m.vertex(va) + m.vertex(vb));
                auto [it, inserted] = edge_dof.try_emplace({va, vb}, -1);
                if (inserted && !m.domain().on_boundary(mid)) {
                    it->second = next++;
                    data->nodes.push_back(mid);
                }
                dofs[dim + 1 + k] = it->second;
            }
        }
    }
    data->num_dofs = next;
    data_ = std::move(data);
}

bool FeSpace::same_as(const FeSpace& other) const {
    return data_ == other.data_ || (degree() == other.degree() && mesh() == other.mesh());
}

const SparseMatrix& FeSpace::mass() const {
    std::call_once(cache_->mass_once, [this] {
        cache_->mass = assemble_mass(*this);
        if (dimension() > 0) cache_->llt.compute(cache_->mass);
    });
    return cache_->mass;
}

Vector FeSpace::solve_mass(const Vector& rhs, const SolverOptions& opts) const {
    if (dimension() == 0) return Vector();
    if (opts.method == SolverOptions::Method::ConjugateGradient) return solve_spd(mass(), rhs, opts);
    mass();
    if (rhs.isZero(0.0)) return Vector::Zero(rhs.size());
    Vector x = cache_->llt.solve(rhs);
    const double res = (cache_->mass * x - rhs).norm() / rhs.norm();
    if (!(res <= opts.tolerance)) {
        // One step of iterative refinement before giving up.
        x += cache_->llt.solve(rhs - cache_->mass * x);
        const double res2 = (cache_->mass * x - rhs).norm() / rhs.norm();
        if (!(res2 <= opts.tolerance)) throw SolverError("mass solve did not converge", res2);
    }
    return x;
}

// ---------------------------------------------------------------------------

FeFunction::FeFunction(FeSpace space) : space_(std::move(space)), coeffs_(Vector::Zero(space_.dimension())) {}

FeFunction::FeFunction(FeSpace space, Vector coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != space_.dimension())
        throw std::invalid_argument("coefficient length does not match space dimension");
}

double FeFunction::value(int element, const Eigen::Vector3d& lambda) const {
    Vector phi;
    shape_values(space_.mesh().dim(), space_.degree(), lambda, phi);
    const auto dofs = space_.element_dofs(element);
    double v = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i)
        if (dofs[i] >= 0) v += coeffs_(dofs[i]) * phi(static_cast<Eigen::Index>(i));
    return v;
}

double FeFunction::value_at(int element, const Point& x) const {
    return value(element, space_.mesh().geometry(element).barycentric(x));
}

Point FeFunction::gradient_at(int element, const Point& x) const {
    const auto g = space_.mesh().geometry(element);
    Eigen::Matrix<double, 2, Eigen::Dynamic> grads;
    shape_gradients(g, space_.degree(), g.barycentric(x), grads);
    const auto dofs = space_.element_dofs(element);
    Point out = Point::Zero();
    for (std::size_t i = 0; i < dofs.size(); ++i)
        if (dofs[i] >= 0) out += coeffs_(dofs[i]) * grads.col(static_cast<Eigen::Index>(i));
    return out;
}

double FeFunction::laplacian(int element) const {
    if (space_.degree() == 1) return 0.0;
    Vector lap;
    shape_laplacians(space_.mesh().geometry(element), space_.degree(), lap);
    const auto dofs = space_.element_dofs(element);
    double out = 0.0;
    for (std::size_t i = 0; i < dofs.size(); ++i)
        if (dofs[i] >= 0) out += coeffs_(dofs[i]) * lap(static_cast<Eigen::Index>(i));
    return out;
}

// ---------------------------------------------------------------------------

SparseMatrix assemble_mass(const FeSpace& space, int quad_degree) {
    const Mesh& mesh = space.mesh();
    const int p = space.degree();
    const auto& rule = reference_rule(mesh.dim(), quad_degree < 0 ? 2 * p : quad_degree);
    std::vector<Triplet> trip;
    Vector phi;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const double meas = mesh.measure(e);
        const auto dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            shape_values(mesh.dim(), p, rule.barycentric[q], phi);
            const double w = rule.weights[q] * meas;
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                if (dofs[i] < 0) continue;
                for (std::size_t j = 0; j < dofs.size(); ++j) {
                    if (dofs[j] < 0) continue;
                    trip.emplace_back(dofs[i], dofs[j], w * phi(static_cast<Eigen::Index>(i)) * phi(static_cast<Eigen::Index>(j)));
                }
            }
        }
    }
    SparseMatrix m(space.dimension(), space.dimension());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SparseMatrix assemble_stiffness(const FeSpace& space, const Coefficient& a, int quad_degree) {
    const Mesh& mesh = space.mesh();
    const int p = space.degree();
    const auto& rule = reference_rule(mesh.dim(), quad_degree < 0 ? 2 * (p - 1) + 2 : quad_degree);
    std::vector<Triplet> trip;
    Eigen::Matrix<double, 2, Eigen::Dynamic> grads;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto g = mesh.geometry(e);
        const auto dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = g.map(rule.points[q]);
            const double av = a(x);
            if (!(av > 0)) throw std::domain_error("diffusion coefficient is not positive at a quadrature node");
            shape_gradients(g, p, rule.barycentric[q], grads);
            const double w = rule.weights[q] * g.measure * av;
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                if (dofs[i] < 0) continue;
                for (std::size_t j = 0; j < dofs.size(); ++j) {
                    if (dofs[j] < 0) continue;
                    trip.emplace_back(dofs[i], dofs[j],
                                      w * grads.col(static_cast<Eigen::Index>(i)).dot(grads.col(static_cast<Eigen::Index>(j))));
                }
            }
        }
    }
    SparseMatrix k(space.dimension(), space.dimension());
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

Vector load_vector(const FeSpace& space, const SpatialFn& f, int quad_degree) {
    const Mesh& mesh = space.mesh();
    const int p = space.degree();
    const auto& rule = reference_rule(mesh.dim(), quad_degree < 0 ? 2 * p + 2 : quad_degree);
    Vector b = Vector::Zero(space.dimension());
    Vector phi;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto g = mesh.geometry(e);
        const auto dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double fv = f(g.map(rule.points[q])) * rule.weights[q] * g.measure;
            shape_values(mesh.dim(), p, rule.barycentric[q], phi);
            for (std::size_t i = 0; i < dofs.size(); ++i)
                if (dofs[i] >= 0) b(dofs[i]) += fv * phi(static_cast<Eigen::Index>(i));
        }
    }
    return b;
}

SparseMatrix cross_mass(const FeSpace& from, const FeSpace& to) {
    if (!from.mesh().same_forest(to.mesh())) throw IncompatibleMeshes("cross_mass: meshes do not share a macro mesh");
    if (from.same_as(to)) return to.mass();
    const std::array<Mesh, 2> pair{from.mesh(), to.mesh()};
    const Mesh fine = common_refinement(pair);
    const int dim = fine.dim();
    const auto& rule = reference_rule(dim, from.degree() + to.degree());
    std::vector<Triplet> trip;
    Vector phi_from, phi_to;
    for (int e = 0; e < fine.num_elements(); ++e) {
        const auto g = fine.geometry(e);
        const int ef = from.mesh().find_ancestor(fine.element_id(e));
        const int et = to.mesh().find_ancestor(fine.element_id(e));
        const auto gf = from.mesh().geometry(ef);
        const auto gt = to.mesh().geometry(et);
        const auto dofs_f = from.element_dofs(ef);
        const auto dofs_t = to.element_dofs(et);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = g.map(rule.points[q]);
            shape_values(dim, from.degree(), gf.barycentric(x), phi_from);
            shape_values(dim, to.degree(), gt.barycentric(x), phi_to);
            const double w = rule.weights[q] * g.measure;
            for (std::size_t i = 0; i < dofs_t.size(); ++i) {
                if (dofs_t[i] < 0) continue;
                for (std::size_t j = 0; j < dofs_f.size(); ++j) {
                    if (dofs_f[j] < 0) continue;
                    trip.emplace_back(dofs_t[i], dofs_f[j],
                                      w * phi_to(static_cast<Eigen::Index>(i)) * phi_from(static_cast<Eigen::Index>(j)));
                }
            }
        }
    }
    SparseMatrix b(to.dimension(), from.dimension());
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
}

Vector solve_spd(const SparseMatrix& a, const Vector& b, const SolverOptions& opts) {
    if (a.rows() != a.cols() || a.rows() != b.size()) throw std::invalid_argument("solve_spd: dimension mismatch");
    if (b.size() == 0) return Vector();
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Vector::Zero(b.size());
    if (opts.method == SolverOptions::Method::ConjugateGradient) {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(opts.tolerance);
        cg.setMaxIterations(opts.max_iterations);
        cg.compute(a);
        Vector x = cg.solve(b);
        const double res = (a * x - b).norm() / bnorm;
        if (cg.info() != Eigen::Success && !(res <= opts.tolerance))
            throw SolverError("conjugate gradient reached the iteration cap", res);
        return x;
    }
    Eigen::SimplicialLLT<SparseMatrix> llt(a);
    if (llt.info() != Eigen::Success) throw SolverError("Cholesky factorisation failed (matrix not SPD)", 1.0);
    Vector x = llt.solve(b);
    double res = (a * x - b).norm() / bnorm;
    if (!(res <= opts.tolerance)) {
        x += llt.solve(b - a * x);
        res = (a * x - b).norm() / bnorm;
        if (!(res <= opts.tolerance)) throw SolverError("direct solve missed the residual tolerance", res);
    }
    return x;
}

FeFunction l2_project(const SpatialFn& f, const FeSpace& space, int quad_degree, const SolverOptions& opts) {
    return FeFunction(space, space.solve_mass(load_vector(space, f, quad_degree), opts));
}

FeFunction discrete_elliptic(const FeFunction& u, const Coefficient& a, const SolverOptions& opts) {
    const SparseMatrix k = assemble_stiffness(u.space(), a);
    return FeFunction(u.space(), u.space().solve_mass(k * u.coefficients(), opts));
}

void write_matrix(std::ostream& os, const SparseMatrix& m) {
    os << "# rows " << m.rows() << " cols " << m.cols() << " nnz " << m.nonZeros() << "\n";
    os.precision(17);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << "\n";
}

}  // namespace waveapost
