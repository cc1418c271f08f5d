#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace waveapost {

/// Nodes and weights on a reference cell. For the interval the reference cell
/// is [0, 1]; for the triangle it is {(s, r) : s, r >= 0, s + r <= 1}.
template <typename Scalar, int Dim>
struct QuadratureRule {
    using PointType = Eigen::Matrix<Scalar, Dim, 1>;
    std::vector<PointType> points;
    std::vector<Scalar> weights;

    std::size_t size() const { return weights.size(); }
};

template <typename Scalar>
using LineRule = QuadratureRule<Scalar, 1>;
template <typename Scalar>
using TriangleRule = QuadratureRule<Scalar, 2>;

/// n-point Gauss-Legendre rule on [0, 1]; exact for polynomials of degree 2n-1.
template <typename Scalar = double>
LineRule<Scalar> gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    LineRule<Scalar> rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    const Scalar pi = std::numbers::pi_v<Scalar>;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
        Scalar dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            Scalar p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (x * p1 - p0) / (x * x - 1);
            const Scalar dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < Scalar(1e-16)) break;
        }
        // Recompute the derivative at the converged node.
        {
            Scalar p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (x * p1 - p0) / (x * x - 1);
        }
        const Scalar w = 2 / ((1 - x * x) * dp * dp);
        // Map [-1, 1] -> [0, 1].
        rule.points[i](0) = (1 - x) / 2;
        rule.points[n - 1 - i](0) = (1 + x) / 2;
        rule.weights[i] = w / 2;
        rule.weights[n - 1 - i] = w / 2;
    }
    return rule;
}

/// Gauss-Legendre rule on [0, 1] exact for polynomials of the given degree.
template <typename Scalar = double>
LineRule<Scalar> line_rule_for_degree(int degree) {
    return gauss_legendre<Scalar>(std::max(1, (degree + 2) / 2));
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle, exact for
/// polynomials of the given total degree.
template <typename Scalar = double>
TriangleRule<Scalar> triangle_rule_for_degree(int degree) {
    const int n = std::max(1, (degree + 3) / 2);
    const auto g = gauss_legendre<Scalar>(n);
    TriangleRule<Scalar> rule;
    rule.points.reserve(n * n);
    rule.weights.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Scalar u = g.points[i](0);
            const Scalar v = g.points[j](0);
            typename TriangleRule<Scalar>::PointType p;
            p << u, v * (1 - u);
            rule.points.push_back(p);
            rule.weights.push_back(g.weights[i] * g.weights[j] * (1 - u));
        }
    }
    return rule;
}

}  // namespace waveapost
