#pragma once

#include <cmath>

#include "gradflow/types.hpp"

namespace gradflow {

// Second-order truncated Taylor jet of a scalar field of (x, y, z):
// value, gradient and (symmetric) Hessian.
struct Jet2 {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
    Mat3 hess = Mat3::Zero();

    Jet2() = default;
    explicit Jet2(double c) : value(c) {}
    Jet2(double v, const Vec3& g, const Mat3& h) : value(v), grad(g), hess(h) {}

    // Coordinate function x_i seeded at `at`.
    static Jet2 variable(int i, double at) {
        Jet2 j(at);
        j.grad[i] = 1.0;
        return j;
    }

    bool is_constant() const { return grad.isZero(0.0) && hess.isZero(0.0); }
};

// f(a) given f(a0), f'(a0), f''(a0).
inline Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
    return Jet2(f0, f1 * a.grad, f1 * a.hess + f2 * (a.grad * a.grad.transpose()));
}

inline Jet2 operator-(const Jet2& a) { return Jet2(-a.value, -a.grad, -a.hess); }

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    return Jet2(a.value + b.value, a.grad + b.grad, a.hess + b.hess);
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    return Jet2(a.value - b.value, a.grad - b.grad, a.hess - b.hess);
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    const Mat3 cross = a.grad * b.grad.transpose();
    return Jet2(a.value * b.value, a.grad * b.value + a.value * b.grad,
                a.hess * b.value + a.value * b.hess + cross + cross.transpose());
}

inline Jet2 operator*(double s, const Jet2& a) { return Jet2(s * a.value, s * a.grad, s * a.hess); }
inline Jet2 operator*(const Jet2& a, double s) { return s * a; }
inline Jet2 operator+(const Jet2& a, double s) { return Jet2(a.value + s, a.grad, a.hess); }

// Caller guarantees b.value != 0.
inline Jet2 reciprocal(const Jet2& b) {
    const double r = 1.0 / b.value;
    return chain(b, r, -r * r, 2.0 * r * r * r);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 sin(const Jet2& a) {
    const double s = std::sin(a.value), c = std::cos(a.value);
    return chain(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
    const double s = std::sin(a.value), c = std::cos(a.value);
    return chain(a, c, -s, -c);
}
inline Jet2 tan(const Jet2& a) {
    const double t = std::tan(a.value), sec2 = 1.0 + t * t;
    return chain(a, t, sec2, 2.0 * t * sec2);
}
inline Jet2 exp(const Jet2& a) {
    const double e = std::exp(a.value);
    return chain(a, e, e, e);
}
inline Jet2 log(const Jet2& a) {
    const double r = 1.0 / a.value;
    return chain(a, std::log(a.value), r, -r * r);
}
inline Jet2 sqrt(const Jet2& a) {
    const double s = std::sqrt(a.value);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.value));
}
inline Jet2 asin(const Jet2& a) {
    const double q = 1.0 - a.value * a.value, rq = 1.0 / std::sqrt(q);
    return chain(a, std::asin(a.value), rq, a.value * rq / q);
}
inline Jet2 acos(const Jet2& a) {
    const double q = 1.0 - a.value * a.value, rq = 1.0 / std::sqrt(q);
    return chain(a, std::acos(a.value), -rq, -a.value * rq / q);
}
inline Jet2 abs(const Jet2& a) {
    const double sg = a.value < 0.0 ? -1.0 : 1.0;
    return chain(a, std::abs(a.value), sg, 0.0);
}
// a^p for constant real p, a > 0 (or integer p).
inline Jet2 pow(const Jet2& a, double p) {
    const double v = std::pow(a.value, p);
    const double d1 = p * std::pow(a.value, p - 1.0);
    const double d2 = p * (p - 1.0) * std::pow(a.value, p - 2.0);
    return chain(a, v, d1, d2);
}

} // namespace gradflow
