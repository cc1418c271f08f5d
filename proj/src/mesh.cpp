#include "waveapost/mesh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <unordered_set>

namespace waveapost {

namespace {

std::uint64_t edge_key(VertexId a, VertexId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

int vertices_per_element(int dim) { return dim + 1; }

ElementGeometry make_geometry(const Forest& forest, const ForestElement& e) {
    ElementGeometry g;
    g.dim = forest.dim();
    if (g.dim == 1) {
        g.x[0] = forest.vertex(e.v[0]);
        g.x[1] = forest.vertex(e.v[1]);
        const double h = g.x[1].x() - g.x[0].x();
        g.measure = std::abs(h);
        g.diameter = std::abs(h);
        g.grad_lambda[0] = Point(-1.0 / h, 0.0);
        g.grad_lambda[1] = Point(1.0 / h, 0.0);
        return g;
    }
    for (int k = 0; k < 3; ++k) g.x[k] = forest.vertex(e.v[k]);
    Eigen::Matrix2d jac;
    jac.col(0) = g.x[1] - g.x[0];
    jac.col(1) = g.x[2] - g.x[0];
    const double det = jac.determinant();
    const Eigen::Matrix2d inv = jac.inverse();
    g.grad_lambda[1] = inv.row(0).transpose();
    g.grad_lambda[2] = inv.row(1).transpose();
    g.grad_lambda[0] = -(g.grad_lambda[1] + g.grad_lambda[2]);
    g.measure = std::abs(det) / 2.0;
    g.diameter = std::max({(g.x[1] - g.x[0]).norm(), (g.x[2] - g.x[1]).norm(), (g.x[2] - g.x[0]).norm()});
    return g;
}

using TreeSet = std::unordered_set<ElemId>;

TreeSet tree_of(const Mesh& mesh) {
    TreeSet set;
    const Forest& forest = *mesh.forest();
    for (ElemId e : mesh.element_ids()) {
        for (ElemId cur = e; cur != kNoElem; cur = forest.element(cur).parent) {
            if (!set.insert(cur).second) break;
        }
    }
    return set;
}

std::vector<ElemId> leaves_of(const Forest& forest, const TreeSet& set) {
    std::vector<ElemId> out;
    for (ElemId e : set) {
        const auto& el = forest.element(e);
        if (!el.bisected() || !set.count(el.children[0])) out.push_back(e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Mutable leaf set used while refining.
class LeafSet {
public:
    LeafSet(Forest& forest, std::span<const ElemId> leaves) : forest_(forest) {
        for (ElemId e : leaves) add(e);
    }

    bool contains(ElemId e) const { return leaves_.count(e) > 0; }

    void split(ElemId e) {
        const auto children = forest_.bisect(e);
        remove(e);
        add(children[0]);
        add(children[1]);
    }

    /// Bisects leaves carrying a hanging midpoint until none remain.
    void close() {
        if (forest_.dim() == 1) return;
        for (;;) {
            std::vector<ElemId> todo;
            for (ElemId e : leaves_) {
                const auto& el = forest_.element(e);
                const std::array<std::array<VertexId, 2>, 3> edges{
                    {{el.v[0], el.v[1]}, {el.v[1], el.v[2]}, {el.v[0], el.v[2]}}};
                for (const auto& ed : edges) {
                    const auto mid = forest_.midpoint_of(ed[0], ed[1]);
                    if (mid && use_count(*mid) > 0) {
                        todo.push_back(e);
                        break;
                    }
                }
            }
            if (todo.empty()) return;
            std::sort(todo.begin(), todo.end());
            for (ElemId e : todo) {
                if (contains(e)) split(e);
            }
        }
    }

    std::vector<ElemId> sorted() const {
        std::vector<ElemId> out(leaves_.begin(), leaves_.end());
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    int use_count(VertexId v) const {
        const auto it = uses_.find(v);
        return it == uses_.end() ? 0 : it->second;
    }

    void add(ElemId e) {
        leaves_.insert(e);
        const auto& el = forest_.element(e);
        for (int k = 0; k < vertices_per_element(forest_.dim()); ++k) ++uses_[el.v[k]];
    }

    void remove(ElemId e) {
        leaves_.erase(e);
        const auto& el = forest_.element(e);
        for (int k = 0; k < vertices_per_element(forest_.dim()); ++k) --uses_[el.v[k]];
    }

    Forest& forest_;
    std::unordered_set<ElemId> leaves_;
    std::unordered_map<VertexId, int> uses_;
};

}  // namespace

// ---------------------------------------------------------------------------

Domain Domain::interval(double length) {
    if (!(length > 0)) throw std::invalid_argument("interval length must be positive");
    return Domain{DomainKind::Interval, length, 1.0};
}

Domain Domain::rectangle(double lx, double ly) {
    if (!(lx > 0) || !(ly > 0)) throw std::invalid_argument("rectangle extents must be positive");
    return Domain{DomainKind::Rectangle, lx, ly};
}

bool Domain::on_boundary(const Point& x) const {
    const double tol = 1e-12 * std::max(lx, ly);
    if (kind == DomainKind::Interval) return std::abs(x.x()) <= tol || std::abs(x.x() - lx) <= tol;
    return std::abs(x.x()) <= tol || std::abs(x.x() - lx) <= tol || std::abs(x.y()) <= tol ||
           std::abs(x.y() - ly) <= tol;
}

bool Domain::contains(const Point& x) const {
    const double tol = 1e-12 * std::max(lx, ly);
    if (x.x() < -tol || x.x() > lx + tol) return false;
    if (kind == DomainKind::Rectangle && (x.y() < -tol || x.y() > ly + tol)) return false;
    return true;
}

double Domain::poincare_constant() const {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    if (kind == DomainKind::Interval) return lx * lx / pi2;
    return 1.0 / (pi2 * (1.0 / (lx * lx) + 1.0 / (ly * ly)));
}

// ---------------------------------------------------------------------------

Forest::Forest(Domain domain, std::vector<Point> vertices, std::vector<std::array<VertexId, 3>> macro)
    : domain_(domain), vertices_(std::move(vertices)) {
    elements_.reserve(macro.size());
    for (const auto& m : macro) {
        ForestElement e;
        e.v = m;
        e.root = static_cast<ElemId>(elements_.size());
        elements_.push_back(e);
    }
    num_roots_ = elements_.size();
}

VertexId Forest::midpoint_vertex(VertexId a, VertexId b) {
    const auto key = edge_key(a, b);
    if (const auto it = midpoints_.find(key); it != midpoints_.end()) return it->second;
    const VertexId id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back(0.5 * (vertices_[static_cast<std::size_t>(a)] + vertices_[static_cast<std::size_t>(b)]));
    midpoints_.emplace(key, id);
    return id;
}

std::optional<VertexId> Forest::midpoint_of(VertexId a, VertexId b) const {
    const auto it = midpoints_.find(edge_key(a, b));
    if (it == midpoints_.end()) return std::nullopt;
    return it->second;
}

std::array<ElemId, 2> Forest::bisect(ElemId id) {
    if (elements_[static_cast<std::size_t>(id)].bisected()) return elements_[static_cast<std::size_t>(id)].children;
    const ForestElement parent = elements_[static_cast<std::size_t>(id)];
    const VertexId m = midpoint_vertex(parent.v[0], parent.v[1]);

    ForestElement c0, c1;
    c0.parent = c1.parent = id;
    c0.generation = c1.generation = parent.generation + 1;
    c0.root = c1.root = parent.root;
    if (dim() == 1) {
        c0.v = {parent.v[0], m, -1};
        c1.v = {m, parent.v[1], -1};
    } else {
        c0.v = {parent.v[0], parent.v[2], m};
        c1.v = {parent.v[2], parent.v[1], m};
    }
    const ElemId i0 = static_cast<ElemId>(elements_.size());
    elements_.push_back(c0);
    elements_.push_back(c1);
    auto& p = elements_[static_cast<std::size_t>(id)];
    p.children = {i0, i0 + 1};
    p.midpoint = m;
    return p.children;
}

bool Forest::is_ancestor_or_self(ElemId ancestor, ElemId e) const {
    for (ElemId cur = e; cur != kNoElem; cur = element(cur).parent) {
        if (cur == ancestor) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------

Point ElementGeometry::map(const Point& ref) const {
    if (dim == 1) return x[0] + ref.x() * (x[1] - x[0]);
    return x[0] + ref.x() * (x[1] - x[0]) + ref.y() * (x[2] - x[0]);
}

Eigen::Vector3d ElementGeometry::barycentric(const Point& p) const {
    Eigen::Vector3d lam = Eigen::Vector3d::Zero();
    if (dim == 1) {
        const double s = (p.x() - x[0].x()) / (x[1].x() - x[0].x());
        lam << 1.0 - s, s, 0.0;
        return lam;
    }
    const Point d = p - x[0];
    lam(1) = grad_lambda[1].dot(d);
    lam(2) = grad_lambda[2].dot(d);
    lam(0) = 1.0 - lam(1) - lam(2);
    return lam;
}

Point ElementGeometry::centroid() const {
    if (dim == 1) return 0.5 * (x[0] + x[1]);
    return (x[0] + x[1] + x[2]) / 3.0;
}

// ---------------------------------------------------------------------------

Mesh::Mesh(std::shared_ptr<Forest> forest, std::vector<ElemId> leaves) : forest_(std::move(forest)) {
    auto data = std::make_shared<Data>();
    std::sort(leaves.begin(), leaves.end());
    data->leaves = std::move(leaves);
    const int dim = forest_->dim();
    const int nv = vertices_per_element(dim);

    std::set<VertexId> verts;
    std::map<std::uint64_t, Facet> facets;
    data->index.reserve(data->leaves.size());
    data->geometry.reserve(data->leaves.size());
    for (std::size_t i = 0; i < data->leaves.size(); ++i) {
        const ElemId id = data->leaves[i];
        const auto& el = forest_->element(id);
        data->index.emplace(id, static_cast<int>(i));
        data->geometry.push_back(make_geometry(*forest_, el));
        for (int k = 0; k < nv; ++k) verts.insert(el.v[k]);

        auto attach = [&](VertexId a, VertexId b) {
            const auto key = dim == 1 ? static_cast<std::uint64_t>(a) : edge_key(a, b);
            auto [it, inserted] = facets.try_emplace(key);
            Facet& f = it->second;
            if (inserted) {
                f.v = dim == 1 ? std::array<VertexId, 2>{a, -1} : std::array<VertexId, 2>{std::min(a, b), std::max(a, b)};
                f.left = static_cast<int>(i);
            } else {
                f.right = static_cast<int>(i);
            }
        };
        if (dim == 1) {
            attach(el.v[0], -1);
            attach(el.v[1], -1);
        } else {
            attach(el.v[0], el.v[1]);
            attach(el.v[1], el.v[2]);
            attach(el.v[0], el.v[2]);
        }
    }
    data->vertex_ids.assign(verts.begin(), verts.end());
    data->facets.reserve(facets.size());
    for (auto& [key, f] : facets) data->facets.push_back(f);
    data_ = std::move(data);
}

int Mesh::local_index(ElemId id) const {
    const auto it = data_->index.find(id);
    return it == data_->index.end() ? -1 : it->second;
}

int Mesh::find_ancestor(ElemId id) const {
    for (ElemId cur = id; cur != kNoElem; cur = forest_->element(cur).parent) {
        if (const int i = local_index(cur); i >= 0) return i;
    }
    return -1;
}

double Mesh::max_diameter() const {
    double h = 0.0;
    for (const auto& g : data_->geometry) h = std::max(h, g.diameter);
    return h;
}

double Mesh::min_diameter() const {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& g : data_->geometry) h = std::min(h, g.diameter);
    return h;
}

bool operator==(const Mesh& a, const Mesh& b) {
    if (a.forest_ != b.forest_) return false;
    return a.data_ == b.data_ || a.data_->leaves == b.data_->leaves;
}

// ---------------------------------------------------------------------------

Mesh uniform_mesh(const Domain& domain, int n) {
    if (n < 1) throw std::invalid_argument("uniform_mesh: subdivision count must be >= 1");
    std::vector<Point> vertices;
    std::vector<std::array<VertexId, 3>> macro;
    if (domain.dim() == 1) {
        for (int i = 0; i <= n; ++i) vertices.emplace_back(domain.lx * i / n, 0.0);
        for (int i = 0; i < n; ++i) macro.push_back({i, i + 1, -1});
    } else {
        auto id = [n](int i, int j) { return static_cast<VertexId>(j * (n + 1) + i); };
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) vertices.emplace_back(domain.lx * i / n, domain.ly * j / n);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                macro.push_back({id(i + 1, j), id(i, j + 1), id(i, j)});
                macro.push_back({id(i, j + 1), id(i + 1, j), id(i + 1, j + 1)});
            }
        }
    }
    std::vector<ElemId> leaves(macro.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) leaves[i] = static_cast<ElemId>(i);
    auto forest = std::make_shared<Forest>(domain, std::move(vertices), std::move(macro));
    return Mesh(std::move(forest), std::move(leaves));
}

Mesh refine(const Mesh& mesh, std::span<const ElemId> marked) {
    if (marked.empty()) return mesh;
    LeafSet set(*mesh.forest(), mesh.element_ids());
    std::vector<ElemId> sorted(marked.begin(), marked.end());
    std::sort(sorted.begin(), sorted.end());
    for (ElemId e : sorted) {
        if (set.contains(e)) set.split(e);
    }
    set.close();
    return Mesh(mesh.forest(), set.sorted());
}

Mesh refine_all(const Mesh& mesh) { return refine(mesh, mesh.element_ids()); }

Mesh coarsen(const Mesh& mesh, std::span<const ElemId> marked) {
    if (marked.empty()) return mesh;
    const Forest& forest = *mesh.forest();
    const int nv = vertices_per_element(mesh.dim());

    std::unordered_set<ElemId> marks;
    for (ElemId e : marked)
        if (mesh.contains(e)) marks.insert(e);

    std::unordered_map<VertexId, std::vector<ElemId>> star;
    for (ElemId e : mesh.element_ids()) {
        const auto& el = forest.element(e);
        for (int k = 0; k < nv; ++k) star[el.v[k]].push_back(e);
    }

    std::set<VertexId> candidates;
    for (ElemId e : marks) {
        const ElemId p = forest.element(e).parent;
        if (p != kNoElem) candidates.insert(forest.element(p).midpoint);
    }

    std::unordered_set<ElemId> removed;
    std::vector<ElemId> added;
    for (VertexId m : candidates) {
        const auto& patch = star[m];
        bool ok = !patch.empty();
        for (ElemId e : patch) {
            const auto& el = forest.element(e);
            if (!marks.count(e) || el.parent == kNoElem || forest.element(el.parent).midpoint != m) {
                ok = false;
                break;
            }
            const auto& sib = forest.element(el.parent).children;
            const ElemId other = sib[0] == e ? sib[1] : sib[0];
            if (std::find(patch.begin(), patch.end(), other) == patch.end()) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        for (ElemId e : patch) {
            removed.insert(e);
            const ElemId p = forest.element(e).parent;
            if (std::find(added.begin(), added.end(), p) == added.end()) added.push_back(p);
        }
    }
    if (removed.empty()) return mesh;

    std::vector<ElemId> leaves;
    leaves.reserve(static_cast<std::size_t>(mesh.num_elements()));
    for (ElemId e : mesh.element_ids())
        if (!removed.count(e)) leaves.push_back(e);
    leaves.insert(leaves.end(), added.begin(), added.end());
    return Mesh(mesh.forest(), std::move(leaves));
}

Mesh coarsen_all(const Mesh& mesh) { return coarsen(mesh, mesh.element_ids()); }

Mesh common_refinement(std::span<const Mesh> meshes) {
    if (meshes.empty()) throw std::invalid_argument("common_refinement: no meshes");
    const Mesh& first = meshes.front();
    bool all_equal = true;
    for (const Mesh& m : meshes) {
        if (!m.same_forest(first)) throw IncompatibleMeshes("meshes do not share a macro mesh");
        if (!(m == first)) all_equal = false;
    }
    if (all_equal) return first;
    TreeSet uni;
    for (const Mesh& m : meshes) {
        const TreeSet t = tree_of(m);
        uni.insert(t.begin(), t.end());
    }
    const auto leaves = leaves_of(*first.forest(), uni);
    LeafSet set(*first.forest(), leaves);
    set.close();
    return Mesh(first.forest(), set.sorted());
}

Mesh finest_common_coarsening(const Mesh& a, const Mesh& b) {
    if (!a.same_forest(b)) throw IncompatibleMeshes("meshes do not share a macro mesh");
    if (a == b) return a;
    const TreeSet ta = tree_of(a);
    const TreeSet tb = tree_of(b);
    TreeSet inter;
    for (ElemId e : ta)
        if (tb.count(e)) inter.insert(e);
    return Mesh(a.forest(), leaves_of(*a.forest(), inter));
}

MeshPairMaps pair_maps(const Mesh& a, const Mesh& b) {
    const std::array<Mesh, 2> both{a, b};
    MeshPairMaps maps{common_refinement(both), finest_common_coarsening(a, b), {}, {}, {}, {}};
    const Mesh& cr = maps.common_refinement;
    const Mesh& fc = maps.finest_common_coarsening;
    for (ElemId e : cr.element_ids()) {
        maps.refinement_to_a.push_back(a.find_ancestor(e));
        maps.refinement_to_b.push_back(b.find_ancestor(e));
    }
    for (ElemId e : a.element_ids()) maps.a_to_coarsening.push_back(fc.find_ancestor(e));
    for (ElemId e : b.element_ids()) maps.b_to_coarsening.push_back(fc.find_ancestor(e));
    return maps;
}

bool is_conforming(const Mesh& mesh) {
    const Domain& dom = mesh.domain();
    for (const Facet& f : mesh.facets()) {
        if (f.interior()) continue;
        if (mesh.dim() == 1) {
            if (!dom.on_boundary(mesh.vertex(f.v[0]))) return false;
        } else {
            // A boundary facet must lie on one side of the rectangle.
            const Point& p = mesh.vertex(f.v[0]);
            const Point& q = mesh.vertex(f.v[1]);
            const Point mid = 0.5 * (p + q);
            if (!dom.on_boundary(p) || !dom.on_boundary(q) || !dom.on_boundary(mid)) return false;
        }
    }
    return true;
}

double min_angle(const Mesh& mesh) {
    if (mesh.dim() == 1) return std::numbers::pi;
    double best = std::numbers::pi;
    for (int i = 0; i < mesh.num_elements(); ++i) {
        const auto g = mesh.geometry(i);
        for (int k = 0; k < 3; ++k) {
            const Point u = g.x[(k + 1) % 3] - g.x[k];
            const Point v = g.x[(k + 2) % 3] - g.x[k];
            best = std::min(best, std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0)));
        }
    }
    return best;
}

std::vector<ElemId> elements_in_box(const Mesh& mesh, const Point& lo, const Point& hi) {
    std::vector<ElemId> out;
    for (int i = 0; i < mesh.num_elements(); ++i) {
        const Point c = mesh.geometry(i).centroid();
        const bool in_x = c.x() >= lo.x() && c.x() <= hi.x();
        const bool in_y = mesh.dim() == 1 || (c.y() >= lo.y() && c.y() <= hi.y());
        if (in_x && in_y) out.push_back(mesh.element_id(i));
    }
    return out;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    os << "# wave-apost mesh\n";
    os << "dim " << mesh.dim() << "\n";
    os << "vertices " << mesh.vertex_ids().size() << "\n";
    os.precision(17);
    for (VertexId v : mesh.vertex_ids()) {
        const Point& p = mesh.vertex(v);
        os << "vertex " << v << ' ' << p.x() << ' ' << p.y() << "\n";
    }
    os << "elements " << mesh.num_elements() << "\n";
    for (int i = 0; i < mesh.num_elements(); ++i) {
        const auto& el = mesh.element(i);
        os << "element " << mesh.element_id(i);
        for (int k = 0; k <= mesh.dim(); ++k) os << ' ' << el.v[k];
        os << ' ' << el.parent << ' ' << el.generation << "\n";
    }
}

}  // namespace waveapost
