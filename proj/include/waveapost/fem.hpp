#pragma once

#include "waveapost/mesh.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <span>
#include <vector>

namespace waveapost {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Quadrature rule on the reference cell with weights normalised to sum 1, so
/// that physical weights are `weight * measure`.
struct ReferenceRule {
    std::vector<Point> points;
    std::vector<Eigen::Vector3d> barycentric;
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
};

/// Cached rule exact for polynomials of the given degree on the reference cell.
const ReferenceRule& reference_rule(int dim, int degree);

/// Diffusion coefficient a(x) with user-supplied bounds.
struct Coefficient {
    SpatialFn value;
    GradientFn gradient;  ///< optional; central differences when empty
    double alpha_min = 1.0;
    double alpha_max = 1.0;

    static Coefficient constant(double c);
    double operator()(const Point& x) const { return value(x); }
    Point grad(const Point& x) const;
    bool is_constant() const { return constant_; }

private:
    bool constant_ = false;
};

/// Lagrange shape functions of degree 1 or 2 in barycentric form. Local order:
/// vertices, then edges (0,1), (1,2), (0,2) in 2D or the interval midpoint in 1D.
int local_dof_count(int dim, int degree);
void shape_values(int dim, int degree, const Eigen::Vector3d& lambda, Vector& out);
/// Columns are gradients of the local basis.
void shape_gradients(const ElementGeometry& geom, int degree, const Eigen::Vector3d& lambda,
                     Eigen::Matrix<double, 2, Eigen::Dynamic>& out);
/// Laplacians of the local basis (constant on an affine element).
void shape_laplacians(const ElementGeometry& geom, int degree, Vector& out);

struct SolverOptions {
    enum class Method { Cholesky, ConjugateGradient };
    Method method = Method::Cholesky;
    double tolerance = 1e-12;
    int max_iterations = 20000;
};

/// Continuous P_p space (p = 1 or 2) with homogeneous Dirichlet conditions.
class FeSpace {
public:
    FeSpace(Mesh mesh, int degree = 1);

    const Mesh& mesh() const { return data_->mesh; }
    int degree() const { return data_->degree; }
    int dimension() const { return data_->num_dofs; }
    int dofs_per_element() const { return data_->dofs_per_element; }

    /// Global dof of each local node of element e; -1 marks a boundary node.
    std::span<const int> element_dofs(int e) const {
        return {data_->element_dofs.data() + static_cast<std::size_t>(e * data_->dofs_per_element),
                static_cast<std::size_t>(data_->dofs_per_element)};
    }
    const Point& node(int dof) const { return data_->nodes[static_cast<std::size_t>(dof)]; }

    /// Same mesh and degree.
    bool same_as(const FeSpace& other) const;

    const SparseMatrix& mass() const;
    /// Solves M x = rhs with a cached factorisation.
    Vector solve_mass(const Vector& rhs, const SolverOptions& opts = {}) const;

private:
    struct Data {
        Mesh mesh;
        int degree;
        int dofs_per_element = 0;
        int num_dofs = 0;
        std::vector<int> element_dofs;
        std::vector<Point> nodes;
    };
    struct Cache;

    std::shared_ptr<const Data> data_;
    std::shared_ptr<Cache> cache_;
};

class FeFunction {
public:
    explicit FeFunction(FeSpace space);
    FeFunction(FeSpace space, Vector coeffs);

    const FeSpace& space() const { return space_; }
    const Vector& coefficients() const { return coeffs_; }
    Vector& coefficients() { return coeffs_; }

    double value(int element, const Eigen::Vector3d& lambda) const;
    double value_at(int element, const Point& x) const;
    Point gradient_at(int element, const Point& x) const;
    double laplacian(int element) const;

private:
    FeSpace space_;
    Vector coeffs_;
};

/// Exact (quadrature degree 2p by default) mass matrix.
SparseMatrix assemble_mass(const FeSpace& space, int quad_degree = -1);
/// a(phi_j, phi_i); default quadrature exact when a is piecewise polynomial of
/// degree <= 2. Throws std::domain_error if a is non-positive at a node.
SparseMatrix assemble_stiffness(const FeSpace& space, const Coefficient& a, int quad_degree = -1);
/// <f, phi_i> by quadrature (default degree 2p + 2).
Vector load_vector(const FeSpace& space, const SpatialFn& f, int quad_degree = -1);
/// B_ij = <phi_i^to, phi_j^from>, exact on the common refinement.
SparseMatrix cross_mass(const FeSpace& from, const FeSpace& to);

Vector solve_spd(const SparseMatrix& a, const Vector& b, const SolverOptions& opts = {});

/// Orthogonal L2 projection of a callback.
FeFunction l2_project(const SpatialFn& f, const FeSpace& space, int quad_degree = -1,
                      const SolverOptions& opts = {});
/// q with <q, chi> = a(U, chi) for all chi in the space of U.
FeFunction discrete_elliptic(const FeFunction& u, const Coefficient& a, const SolverOptions& opts = {});

/// Coordinate-format dump: `row col value` per nonzero, 0-based.
void write_matrix(std::ostream& os, const SparseMatrix& m);

}  // namespace waveapost
