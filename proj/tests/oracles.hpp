#pragma once

// Independent reference computations for the tests: Golub-Welsch Gauss rules,
// dense linear algebra and geometric forest queries. Nothing here calls the
// library's quadrature, assembly or forest traversal.

#include "waveapost/mesh.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using waveapost::ElemId;
using waveapost::Mesh;
using waveapost::Point;

/// n-point Gauss-Legendre rule on [a, b] from the Jacobi matrix eigenproblem.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss(int n, double a = 0.0, double b = 1.0) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Eigen::VectorXd x = 0.5 * (b - a) * (es.eigenvalues().array() + 1.0) + a;
    Eigen::VectorXd w = (b - a) * es.eigenvectors().row(0).transpose().array().square();
    return {x, w};
}

inline double integrate(const std::function<double(double)>& f, double a, double b, int n = 20) {
    const auto [x, w] = gauss(n, a, b);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w(i) * f(x(i));
    return s;
}

/// Piecewise integration over `cells` equal subintervals.
inline double integrate_cells(const std::function<double(double)>& f, double a, double b, int cells, int n = 10) {
    double s = 0.0;
    for (int c = 0; c < cells; ++c) s += integrate(f, a + (b - a) * c / cells, a + (b - a) * (c + 1) / cells, n);
    return s;
}

/// Hat function of node i on a uniform grid of [0, L] with n cells.
inline double hat(int i, int n, double L, double x) {
    const double h = L / n;
    return std::max(0.0, 1.0 - std::abs(x - i * h) / h);
}

inline Eigen::MatrixXd p1_mass_1d(int n, double L) {
    const double h = L / n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n - 1, n - 1);
    for (int i = 0; i < n - 1; ++i) {
        m(i, i) = 2.0 * h / 3.0;
        if (i > 0) m(i, i - 1) = m(i - 1, i) = h / 6.0;
    }
    return m;
}

inline Eigen::MatrixXd p1_stiffness_1d(int n, double L) {
    const double h = L / n;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n - 1, n - 1);
    for (int i = 0; i < n - 1; ++i) {
        k(i, i) = 2.0 / h;
        if (i > 0) k(i, i - 1) = k(i - 1, i) = -1.0 / h;
    }
    return k;
}

/// Vertex coordinates of a forest element.
inline std::vector<Point> corners(const waveapost::Forest& f, ElemId e) {
    const auto& el = f.element(e);
    std::vector<Point> out;
    for (int i = 0; i < f.dim() + 1; ++i) out.push_back(f.vertex(el.v[static_cast<std::size_t>(i)]));
    return out;
}

inline double area(const std::vector<Point>& c) {
    if (c.size() == 2) return std::abs(c[1].x() - c[0].x());
    return 0.5 * std::abs((c[1] - c[0]).x() * (c[2] - c[0]).y() - (c[1] - c[0]).y() * (c[2] - c[0]).x());
}

inline bool point_inside(const std::vector<Point>& c, const Point& p) {
    constexpr double tol = 1e-12;
    if (c.size() == 2) {
        const double lo = std::min(c[0].x(), c[1].x()), hi = std::max(c[0].x(), c[1].x());
        return p.x() >= lo - tol && p.x() <= hi + tol;
    }
    const double a = area(c);
    const double s = area({p, c[1], c[2]}) + area({c[0], p, c[2]}) + area({c[0], c[1], p});
    return std::abs(s - a) <= tol * std::max(1.0, a);
}

/// Geometric containment of element `inner` in element `outer`.
inline bool contained(const waveapost::Forest& f, ElemId inner, ElemId outer) {
    const auto o = corners(f, outer);
    for (const Point& p : corners(f, inner))
        if (!point_inside(o, p)) return false;
    return true;
}

/// Forest elements that are unions of leaves of `m`: E contains a leaf and is
/// not strictly inside one.
inline std::set<ElemId> tree(const Mesh& m) {
    const auto& f = *m.forest();
    std::set<ElemId> out;
    for (ElemId e = 0; e < static_cast<ElemId>(f.num_elements()); ++e) {
        bool inside_leaf = false, holds_leaf = false;
        for (ElemId l : m.element_ids()) {
            if (l == e) {
                holds_leaf = true;
                continue;
            }
            if (contained(f, e, l)) inside_leaf = true;
            if (contained(f, l, e)) holds_leaf = true;
        }
        if (holds_leaf && !inside_leaf) out.insert(e);
    }
    return out;
}

/// Minimal elements of a downward-closed-by-ancestry set: those none of whose
/// forest children are in the set.
inline std::set<ElemId> leaves(const waveapost::Forest& f, const std::set<ElemId>& s) {
    std::set<ElemId> out;
    for (ElemId e : s) {
        const auto& el = f.element(e);
        const bool split = el.bisected() && (s.count(el.children[0]) || s.count(el.children[1]));
        if (!split) out.insert(e);
    }
    return out;
}

inline std::set<ElemId> as_set(const Mesh& m) { return {m.element_ids().begin(), m.element_ids().end()}; }

/// True when every facet of the mesh has a partner or lies on the boundary,
/// checked by brute force over all element pairs.
inline bool conforming(const Mesh& m) {
    const auto& f = *m.forest();
    if (m.dim() == 1) return true;
    std::map<std::pair<int, int>, int> count;
    for (ElemId e : m.element_ids()) {
        const auto& v = f.element(e).v;
        for (auto [a, b] : {std::pair{v[0], v[1]}, std::pair{v[1], v[2]}, std::pair{v[0], v[2]}})
            ++count[{std::min(a, b), std::max(a, b)}];
    }
    for (const auto& [edge, c] : count) {
        if (c == 2) continue;
        const Point mid = 0.5 * (f.vertex(edge.first) + f.vertex(edge.second));
        if (c != 1 || !m.domain().on_boundary(mid)) return false;
    }
    return true;
}

}  // namespace oracle
