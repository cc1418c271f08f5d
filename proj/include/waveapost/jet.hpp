#pragma once

#include <Eigen/Core>

#include <cmath>

namespace waveapost {

/// Second-order forward-mode number: value, gradient and Hessian with respect
/// to N independent variables.
template <typename Scalar, int N>
struct Jet {
    using Grad = Eigen::Matrix<Scalar, N, 1>;
    using Hess = Eigen::Matrix<Scalar, N, N>;

    Scalar v{0};
    Grad g = Grad::Zero();
    Hess h = Hess::Zero();

    Jet() = default;
    Jet(Scalar value) : v(value) {}  // NOLINT: implicit constants are the point
    Jet(Scalar value, Grad grad, Hess hess) : v(value), g(std::move(grad)), h(std::move(hess)) {}

    static Jet variable(Scalar value, int i) {
        Jet j(value);
        j.g(i) = Scalar(1);
        return j;
    }

    Jet& operator+=(const Jet& o) { v += o.v; g += o.g; h += o.h; return *this; }
    Jet& operator-=(const Jet& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }
    Jet& operator/=(const Jet& o) { return *this = *this / o; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(const Jet& a) { return Jet(-a.v, -a.g, -a.h); }
    friend Jet operator*(const Jet& a, const Jet& b) {
        return Jet(a.v * b.v, a.v * b.g + b.v * a.g, a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose());
    }
    friend Jet operator/(const Jet& a, const Jet& b) {
        const Scalar inv = Scalar(1) / b.v;
        return a * chain(b, inv, -inv * inv, Scalar(2) * inv * inv * inv);
    }

    /// f(a) given f, f' and f'' at a.v.
    static Jet chain(const Jet& a, Scalar f, Scalar df, Scalar d2f) {
        return Jet(f, df * a.g, df * a.h + d2f * a.g * a.g.transpose());
    }
};

template <typename S, int N>
Jet<S, N> sin(const Jet<S, N>& a) {
    using std::sin, std::cos;
    return Jet<S, N>::chain(a, sin(a.v), cos(a.v), -sin(a.v));
}

template <typename S, int N>
Jet<S, N> cos(const Jet<S, N>& a) {
    using std::sin, std::cos;
    return Jet<S, N>::chain(a, cos(a.v), -sin(a.v), -cos(a.v));
}

template <typename S, int N>
Jet<S, N> tan(const Jet<S, N>& a) {
    using std::tan;
    const S t = tan(a.v);
    const S d = S(1) + t * t;
    return Jet<S, N>::chain(a, t, d, S(2) * t * d);
}

template <typename S, int N>
Jet<S, N> exp(const Jet<S, N>& a) {
    using std::exp;
    const S e = exp(a.v);
    return Jet<S, N>::chain(a, e, e, e);
}

template <typename S, int N>
Jet<S, N> log(const Jet<S, N>& a) {
    using std::log;
    return Jet<S, N>::chain(a, log(a.v), S(1) / a.v, -S(1) / (a.v * a.v));
}

template <typename S, int N>
Jet<S, N> sqrt(const Jet<S, N>& a) {
    using std::sqrt;
    const S s = sqrt(a.v);
    return Jet<S, N>::chain(a, s, S(0.5) / s, S(-0.25) / (s * a.v));
}

template <typename S, int N>
Jet<S, N> pow(const Jet<S, N>& a, S p) {
    using std::pow;
    return Jet<S, N>::chain(a, pow(a.v, p), p * pow(a.v, p - S(1)), p * (p - S(1)) * pow(a.v, p - S(2)));
}

/// Jet in (x, y, t).
using Jet3 = Jet<double, 3>;

}  // namespace waveapost
