#include "waveapost/field.hpp"

#include <algorithm>
#include <cmath>

namespace waveapost {

Field Field::analytic(SharedFn fn, double weight) {
    Field f;
    f.analytic_.push_back({std::move(fn), weight});
    return f;
}

int Field::fe_degree() const {
    int p = 0;
    for (const auto& u : fe_) p = std::max(p, u.space().degree());
    return p;
}

std::vector<Mesh> Field::meshes() const {
    std::vector<Mesh> out;
    for (const auto& u : fe_) {
        const bool seen = std::any_of(out.begin(), out.end(), [&](const Mesh& m) { return m == u.space().mesh(); });
        if (!seen) out.push_back(u.space().mesh());
    }
    return out;
}

double Field::value(const Point& x, ElemId containing) const {
    double v = 0.0;
    for (const auto& u : fe_) {
        const int e = u.space().mesh().find_ancestor(containing);
        if (e < 0) throw std::invalid_argument("Field::value: element is not inside the FE mesh");
        v += u.value_at(e, x);
    }
    for (const auto& t : analytic_) v += t.weight * (*t.fn)(x);
    return v;
}

void Field::add_fe(const FeFunction& u, double s) {
    for (auto& mine : fe_) {
        if (mine.space().same_as(u.space())) {
            mine.coefficients() += s * u.coefficients();
            return;
        }
    }
    if (!fe_.empty() && !fe_.front().space().mesh().same_forest(u.space().mesh()))
        throw IncompatibleMeshes("Field: FE terms must share a macro mesh");
    fe_.emplace_back(u.space(), (s * u.coefficients()).eval());
}

void Field::add_analytic(const SharedFn& fn, double w) {
    for (auto& t : analytic_) {
        if (t.fn == fn) {
            t.weight += w;
            return;
        }
    }
    analytic_.push_back({fn, w});
}

Field& Field::operator+=(const Field& other) {
    if (this == &other) return *this *= 2.0;
    for (const auto& u : other.fe_) add_fe(u, 1.0);
    for (const auto& t : other.analytic_) add_analytic(t.fn, t.weight);
    return *this;
}

Field& Field::operator-=(const Field& other) {
    if (this == &other) return *this *= 0.0;
    for (const auto& u : other.fe_) add_fe(u, -1.0);
    for (const auto& t : other.analytic_) add_analytic(t.fn, -t.weight);
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& u : fe_) u.coefficients() *= s;
    for (auto& t : analytic_) t.weight *= s;
    return *this;
}

// ---------------------------------------------------------------------------

FieldSampler::FieldSampler(Mesh mesh, int quad_degree) : mesh_(std::move(mesh)), degree_(quad_degree) {
    const auto& rule = reference_rule(mesh_.dim(), quad_degree);
    const std::size_t n = rule.size() * static_cast<std::size_t>(mesh_.num_elements());
    points_.reserve(n);
    elements_.reserve(n);
    weights_.resize(static_cast<Eigen::Index>(n));
    Eigen::Index k = 0;
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        const auto g = mesh_.geometry(e);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            points_.push_back(g.map(rule.points[q]));
            elements_.push_back(e);
            weights_(k++) = rule.weights[q] * g.measure;
        }
    }
}

const SparseMatrix& FieldSampler::evaluation_matrix(const FeSpace& space) const {
    const auto key = std::make_pair(space.mesh().identity(), space.degree());
    if (auto it = eval_cache_.find(key); it != eval_cache_.end()) return it->second.second;
    if (!space.mesh().same_forest(mesh_)) throw IncompatibleMeshes("FieldSampler: mesh from another forest");

    std::vector<Eigen::Triplet<double>> trip;
    Vector phi;
    std::vector<int> ancestor(static_cast<std::size_t>(mesh_.num_elements()));
    for (int e = 0; e < mesh_.num_elements(); ++e) {
        ancestor[static_cast<std::size_t>(e)] = space.mesh().find_ancestor(mesh_.element_id(e));
        if (ancestor[static_cast<std::size_t>(e)] < 0)
            throw std::invalid_argument("FieldSampler: quadrature mesh does not refine the FE mesh");
    }
    for (std::size_t q = 0; q < points_.size(); ++q) {
        const int a = ancestor[static_cast<std::size_t>(elements_[q])];
        const auto g = space.mesh().geometry(a);
        shape_values(mesh_.dim(), space.degree(), g.barycentric(points_[q]), phi);
        const auto dofs = space.element_dofs(a);
        for (std::size_t i = 0; i < dofs.size(); ++i)
            if (dofs[i] >= 0) trip.emplace_back(static_cast<int>(q), dofs[i], phi(static_cast<Eigen::Index>(i)));
    }
    SparseMatrix m(static_cast<Eigen::Index>(points_.size()), space.dimension());
    m.setFromTriplets(trip.begin(), trip.end());
    return eval_cache_.emplace(key, std::make_pair(space.mesh(), std::move(m))).first->second.second;
}

const Vector& FieldSampler::analytic_values(const SharedFn& fn) const {
    if (auto it = fn_cache_.find(fn.get()); it != fn_cache_.end()) return it->second.second;
    return fn_cache_.emplace(fn.get(), std::make_pair(fn, values(*fn))).first->second.second;
}

Vector FieldSampler::values(const Field& f) const {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(points_.size()));
    for (const auto& u : f.fe_terms()) out += evaluation_matrix(u.space()) * u.coefficients();
    for (const auto& t : f.analytic_terms()) out += t.weight * analytic_values(t.fn);
    return out;
}

Vector FieldSampler::values(const SpatialFn& f) const {
    Vector out(static_cast<Eigen::Index>(points_.size()));
    for (std::size_t q = 0; q < points_.size(); ++q) out(static_cast<Eigen::Index>(q)) = f(points_[q]);
    return out;
}

// ---------------------------------------------------------------------------

Mesh quadrature_mesh(std::span<const Field> fields, const Mesh& fallback) {
    std::vector<Mesh> meshes;
    for (const auto& f : fields)
        for (auto& m : f.meshes())
            if (std::none_of(meshes.begin(), meshes.end(), [&](const Mesh& x) { return x == m; })) meshes.push_back(m);
    if (meshes.empty()) return fallback;
    return common_refinement(meshes);
}

int default_quad_degree(int p) { return 2 * p + 2; }

double l2_norm(const Field& f, const FieldSampler& sampler) {
    const Vector v = sampler.values(f);
    return std::sqrt(std::max(0.0, sampler.weights().dot(v.cwiseAbs2())));
}

double l2_norm(const Field& f, const Mesh& quad_mesh, int quad_degree) {
    return l2_norm(f, FieldSampler(quad_mesh, quad_degree));
}

double l2_norm(const Field& f, int quad_degree) {
    if (!f.has_fe_part()) throw std::invalid_argument("l2_norm: analytic-only field needs a quadrature mesh");
    const std::array<Field, 1> one{f};
    const Mesh m = quadrature_mesh(one, f.fe_terms().front().space().mesh());
    return l2_norm(f, m, quad_degree < 0 ? default_quad_degree(std::max(1, f.fe_degree())) : quad_degree);
}

double inner(const Field& a, const Field& b, const FieldSampler& sampler) {
    return sampler.weights().dot(sampler.values(a).cwiseProduct(sampler.values(b)));
}

Eigen::MatrixXd gram(std::span<const Field> fields, const FieldSampler& sampler) {
    const auto n = static_cast<Eigen::Index>(fields.size());
    Eigen::MatrixXd vals(static_cast<Eigen::Index>(sampler.size()), n);
    for (Eigen::Index i = 0; i < n; ++i) vals.col(i) = sampler.values(fields[static_cast<std::size_t>(i)]);
    return vals.transpose() * sampler.weights().asDiagonal() * vals;
}

Vector load_vector(const Field& f, const FeSpace& target, int quad_degree) {
    Vector b = Vector::Zero(target.dimension());
    for (const auto& u : f.fe_terms()) b += cross_mass(u.space(), target) * u.coefficients();
    if (f.has_analytic_part()) {
        const auto terms = f.analytic_terms();
        b += load_vector(
            target,
            [&terms](const Point& x) {
                double v = 0.0;
                for (const auto& t : terms) v += t.weight * (*t.fn)(x);
                return v;
            },
            quad_degree < 0 ? default_quad_degree(target.degree()) : quad_degree);
    }
    return b;
}

FeFunction l2_project(const Field& f, const FeSpace& target, int quad_degree, const SolverOptions& opts) {
    Vector direct = Vector::Zero(target.dimension());
    Field rest;
    for (const auto& u : f.fe_terms()) {
        if (u.space().same_as(target))
            direct += u.coefficients();
        else
            rest += Field(u);
    }
    for (const auto& t : f.analytic_terms()) rest += Field::analytic(t.fn, t.weight);
    if (rest.empty()) return FeFunction(target, std::move(direct));
    return FeFunction(target, direct + target.solve_mass(load_vector(rest, target, quad_degree), opts));
}

}  // namespace waveapost
