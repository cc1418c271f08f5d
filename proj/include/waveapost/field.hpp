#pragma once

#include "waveapost/fem.hpp"

#include <map>
#include <span>
#include <vector>

namespace waveapost {

/// Spatial function held as a linear combination of finite element functions
/// (possibly on different meshes of one forest) and analytic callbacks.
///
/// Arithmetic is lazy: terms on the same space are merged by adding
/// coefficients, analytic terms are merged by callback identity, and nothing is
/// interpolated. Norms and inner products are taken on the common refinement of
/// every mesh involved, where each FE term is an exact polynomial.
class Field {
public:
    struct AnalyticTerm {
        SharedFn fn;
        double weight = 1.0;
    };

    Field() = default;
    explicit Field(const FeFunction& u) { fe_.push_back(u); }
    static Field analytic(SharedFn fn, double weight = 1.0);

    std::span<const FeFunction> fe_terms() const { return fe_; }
    std::span<const AnalyticTerm> analytic_terms() const { return analytic_; }
    bool has_fe_part() const { return !fe_.empty(); }
    bool has_analytic_part() const { return !analytic_.empty(); }
    bool empty() const { return fe_.empty() && analytic_.empty(); }
    /// Highest polynomial degree among FE terms (0 when none).
    int fe_degree() const;
    std::vector<Mesh> meshes() const;

    /// Value at x, which must lie in forest element `containing`; that element
    /// must be at least as fine as every FE mesh of the field.
    double value(const Point& x, ElemId containing) const;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator/(Field a, double s) { return a *= 1.0 / s; }
    friend Field operator-(Field a) { return a *= -1.0; }

private:
    void add_fe(const FeFunction& u, double s);
    void add_analytic(const SharedFn& fn, double w);

    std::vector<FeFunction> fe_;
    std::vector<AnalyticTerm> analytic_;
};

/// Quadrature points on a fixed mesh with cached evaluation operators for FE
/// spaces and cached analytic values. Not thread-safe; use one per thread.
class FieldSampler {
public:
    FieldSampler(Mesh mesh, int quad_degree);

    const Mesh& mesh() const { return mesh_; }
    int quad_degree() const { return degree_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<Point>& points() const { return points_; }
    const Vector& weights() const { return weights_; }
    /// Local element (in mesh()) that owns each point.
    const std::vector<int>& point_elements() const { return elements_; }

    /// Field values at every quadrature point.
    Vector values(const Field& f) const;
    /// Values of a bare callback (not cached).
    Vector values(const SpatialFn& f) const;

private:
    const SparseMatrix& evaluation_matrix(const FeSpace& space) const;
    const Vector& analytic_values(const SharedFn& fn) const;

    Mesh mesh_;
    int degree_;
    std::vector<Point> points_;
    std::vector<int> elements_;
    Vector weights_;
    mutable std::map<std::pair<const void*, int>, std::pair<Mesh, SparseMatrix>> eval_cache_;
    mutable std::map<const SpatialFn*, std::pair<SharedFn, Vector>> fn_cache_;
};

/// Common refinement of all FE meshes of the fields, or `fallback` if none.
Mesh quadrature_mesh(std::span<const Field> fields, const Mesh& fallback);

/// Default spatial quadrature degree: 2p + 2.
int default_quad_degree(int p);

double l2_norm(const Field& f, const Mesh& quad_mesh, int quad_degree);
double l2_norm(const Field& f, const FieldSampler& sampler);
/// Norm on the common refinement of the field's own meshes.
double l2_norm(const Field& f, int quad_degree = -1);
double inner(const Field& a, const Field& b, const FieldSampler& sampler);
/// Gram matrix <f_i, f_j>.
Eigen::MatrixXd gram(std::span<const Field> fields, const FieldSampler& sampler);

/// <F, phi_i> for the basis of `target`: FE terms exactly via cross_mass,
/// analytic terms by quadrature on the target mesh.
Vector load_vector(const Field& f, const FeSpace& target, int quad_degree = -1);
/// Orthogonal L2 projection. Terms already in `target` are copied, not solved
/// for, so projecting a member of the space is exact.
FeFunction l2_project(const Field& f, const FeSpace& target, int quad_degree = -1, const SolverOptions& opts = {});

}  // namespace waveapost
