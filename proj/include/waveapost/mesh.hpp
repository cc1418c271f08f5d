#pragma once

#include "waveapost/types.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace waveapost {

enum class DomainKind { Interval, Rectangle };

/// Interval [0, L] or axis-aligned rectangle [0, Lx] x [0, Ly].
struct Domain {
    DomainKind kind = DomainKind::Interval;
    double lx = 1.0;
    double ly = 1.0;

    static Domain interval(double length);
    static Domain rectangle(double lx, double ly);

    int dim() const { return kind == DomainKind::Interval ? 1 : 2; }
    bool on_boundary(const Point& x) const;
    bool contains(const Point& x) const;
    double measure() const { return kind == DomainKind::Interval ? lx : lx * ly; }
    /// Sharp Poincare-Friedrichs constant 1 / lambda_1 of the Dirichlet Laplacian.
    double poincare_constant() const;
};

/// A node of the refinement forest. In 2D, v[0]-v[1] is the refinement edge and
/// v[2] the newest vertex. In 1D only v[0] < v[1] (by coordinate) are used.
struct ForestElement {
    std::array<VertexId, 3> v{-1, -1, -1};
    ElemId parent = kNoElem;
    std::array<ElemId, 2> children{kNoElem, kNoElem};
    VertexId midpoint = -1;
    int generation = 0;
    ElemId root = kNoElem;

    bool bisected() const { return children[0] != kNoElem; }
};

/// Append-only store of every element and vertex ever created from one macro
/// mesh. Meshes are leaf sets of this forest; bisecting an element twice returns
/// the same children, so element ids are stable across meshes.
class Forest {
public:
    Forest(Domain domain, std::vector<Point> vertices, std::vector<std::array<VertexId, 3>> macro);

    int dim() const { return domain_.dim(); }
    const Domain& domain() const { return domain_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_elements() const { return elements_.size(); }
    std::size_t num_roots() const { return num_roots_; }

    const Point& vertex(VertexId id) const { return vertices_[static_cast<std::size_t>(id)]; }
    const ForestElement& element(ElemId id) const { return elements_[static_cast<std::size_t>(id)]; }

    std::array<ElemId, 2> bisect(ElemId id);
    std::optional<VertexId> midpoint_of(VertexId a, VertexId b) const;
    bool is_ancestor_or_self(ElemId ancestor, ElemId e) const;

private:
    VertexId midpoint_vertex(VertexId a, VertexId b);

    Domain domain_;
    std::vector<Point> vertices_;
    std::vector<ForestElement> elements_;
    std::unordered_map<std::uint64_t, VertexId> midpoints_;
    std::size_t num_roots_ = 0;
};

/// Affine geometry of a single interval or triangle.
struct ElementGeometry {
    int dim = 1;
    std::array<Point, 3> x{};
    /// Gradients of the barycentric coordinates (constant on the element).
    std::array<Point, 3> grad_lambda{};
    double measure = 0.0;
    double diameter = 0.0;

    int num_vertices() const { return dim + 1; }
    /// Reference coordinates: interval s in [0,1]; triangle (s, r).
    Point map(const Point& ref) const;
    Eigen::Vector3d barycentric(const Point& p) const;
    Point centroid() const;
};

/// Shared facet (edge in 2D, vertex in 1D) between at most two elements.
struct Facet {
    std::array<VertexId, 2> v{-1, -1};
    int left = -1;   ///< local element index
    int right = -1;  ///< local element index, -1 on the boundary
    bool interior() const { return right >= 0; }
};

/// Conforming leaf set of a refinement forest. Copies share immutable data.
class Mesh {
public:
    Mesh(std::shared_ptr<Forest> forest, std::vector<ElemId> leaves);

    int dim() const { return forest_->dim(); }
    const Domain& domain() const { return forest_->domain(); }
    const std::shared_ptr<Forest>& forest() const { return forest_; }
    bool same_forest(const Mesh& other) const { return forest_ == other.forest_; }

    int num_elements() const { return static_cast<int>(data_->leaves.size()); }
    std::span<const ElemId> element_ids() const { return data_->leaves; }
    ElemId element_id(int i) const { return data_->leaves[static_cast<std::size_t>(i)]; }
    /// Local index of a forest element, or -1 when it is not a leaf of this mesh.
    int local_index(ElemId id) const;
    bool contains(ElemId id) const { return local_index(id) >= 0; }
    /// Local index of the ancestor-or-self of `id` in this mesh, or -1.
    int find_ancestor(ElemId id) const;

    const ForestElement& element(int i) const { return forest_->element(element_id(i)); }
    ElementGeometry geometry(int i) const { return data_->geometry[static_cast<std::size_t>(i)]; }
    double diameter(int i) const { return data_->geometry[static_cast<std::size_t>(i)].diameter; }
    double measure(int i) const { return data_->geometry[static_cast<std::size_t>(i)].measure; }

    std::span<const VertexId> vertex_ids() const { return data_->vertex_ids; }
    const Point& vertex(VertexId id) const { return forest_->vertex(id); }
    bool is_boundary_vertex(VertexId id) const { return domain().on_boundary(vertex(id)); }

    std::span<const Facet> facets() const { return data_->facets; }

    double max_diameter() const;
    double min_diameter() const;

    /// Address of the shared data; equal for copies of one mesh.
    const void* identity() const { return data_.get(); }

    friend bool operator==(const Mesh& a, const Mesh& b);

private:
    struct Data {
        std::vector<ElemId> leaves;
        std::unordered_map<ElemId, int> index;
        std::vector<ElementGeometry> geometry;
        std::vector<VertexId> vertex_ids;
        std::vector<Facet> facets;
    };

    std::shared_ptr<Forest> forest_;
    std::shared_ptr<const Data> data_;
};

/// Common refinement and finest common coarsening of two meshes of one forest.
struct MeshPairMaps {
    Mesh common_refinement;
    Mesh finest_common_coarsening;
    std::vector<int> refinement_to_a;  ///< common_refinement element -> element of a
    std::vector<int> refinement_to_b;
    std::vector<int> a_to_coarsening;  ///< element of a -> finest_common_coarsening element
    std::vector<int> b_to_coarsening;
};

/// n equal intervals, or n x n squares split along the anti-diagonal with the
/// diagonal as the shared refinement edge.
Mesh uniform_mesh(const Domain& domain, int n);

/// Bisects every marked leaf, then closes the mesh to conformity.
Mesh refine(const Mesh& mesh, std::span<const ElemId> marked);
Mesh refine_all(const Mesh& mesh);

/// Merges complete, marked sibling groups whose removal keeps the mesh
/// conforming. Incomplete marks are ignored.
Mesh coarsen(const Mesh& mesh, std::span<const ElemId> marked);
Mesh coarsen_all(const Mesh& mesh);

MeshPairMaps pair_maps(const Mesh& a, const Mesh& b);
/// Coarsest mesh refining every input.
Mesh common_refinement(std::span<const Mesh> meshes);
Mesh finest_common_coarsening(const Mesh& a, const Mesh& b);

/// Every facet is shared by two elements or lies on the boundary.
bool is_conforming(const Mesh& mesh);
/// Smallest interior angle in radians (2D); 1D returns pi.
double min_angle(const Mesh& mesh);

/// Leaves whose centroid lies in [lo, hi] (componentwise, y ignored in 1D).
std::vector<ElemId> elements_in_box(const Mesh& mesh, const Point& lo, const Point& hi);

/// Plain text: `vertex id x y`, `element id v0 v1 v2 parent generation`.
void write_mesh(std::ostream& os, const Mesh& mesh);

}  // namespace waveapost
