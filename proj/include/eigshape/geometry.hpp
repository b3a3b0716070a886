#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "errors.hpp"
#include "interval.hpp"

namespace eigshape {

/// Shape parameter p = (r, theta): |OB| and the angle at O.
class ShapeParam {
public:
    ShapeParam(double r, double theta) : r_(r), theta_(theta)
    {
        if (!(r > 0) || !std::isfinite(r) || !(theta > 0) || !(theta < std::numbers::pi)) {
            throw DegenerateShape("shape parameter must satisfy r > 0 and 0 < theta < pi");
        }
    }

    /// The equilateral triangle (1, pi/3).
    static ShapeParam regular() { return {1.0, std::numbers::pi / 3.0}; }

    double r() const { return r_; }
    double theta() const { return theta_; }

private:
    double r_;
    double theta_;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Triangle {
    Point2 O;
    Point2 A;
    Point2 B;

    double signed_area() const
    {
        return 0.5 * ((A.x - O.x) * (B.y - O.y) - (B.x - O.x) * (A.y - O.y));
    }

    double longest_edge() const
    {
        auto len = [](Point2 p, Point2 q) { return std::hypot(q.x - p.x, q.y - p.y); };
        return std::max({len(O, A), len(A, B), len(B, O)});
    }
};

inline Triangle triangle_of(const ShapeParam& p)
{
    return {{0.0, 0.0}, {1.0, 0.0}, {p.r() * std::cos(p.theta()), p.r() * std::sin(p.theta())}};
}

/// Upper-triangular map [[1, alpha], [0, beta]] sending T^p onto another triangle.
struct AffineMap {
    double alpha = 0.0;
    double beta = 1.0;

    double gamma() const { return alpha * alpha + beta * beta + 1.0; }
};

struct IntervalAffineMap {
    Interval alpha{0.0};
    Interval beta{1.0};
};

/// (r, theta) known only up to intervals, e.g. a point moving along a segment.
struct ShapeEnclosure {
    Interval r;
    Interval theta;
};

inline ShapeEnclosure enclosure_of(const ShapeParam& p) { return {Interval(p.r()), Interval(p.theta())}; }

inline void require_valid(const ShapeEnclosure& s)
{
    if (!(s.r.lo() > 0) || !(s.theta.lo() > 0) || !(s.theta.hi() < std::numbers::pi)) {
        throw DegenerateShape("perturbed shape leaves the admissible region");
    }
}

/// S_{p, q}: the map with S(T^p) = T^q.
inline AffineMap transform_between(const ShapeParam& p, const ShapeParam& q)
{
    const double denom = p.r() * std::sin(p.theta());
    return {(q.r() * std::cos(q.theta()) - p.r() * std::cos(p.theta())) / denom,
            q.r() * std::sin(q.theta()) / denom};
}

inline IntervalAffineMap transform_between(const ShapeEnclosure& p, const ShapeEnclosure& q)
{
    require_valid(p);
    require_valid(q);
    const Interval denom = p.r * sin(p.theta);
    return {(q.r * cos(q.theta) - p.r * cos(p.theta)) / denom, q.r * sin(q.theta) / denom};
}

/// Eigenvalues (min, max) of Q Q^T for Q = [[1, alpha], [0, beta]].
inline std::pair<double, double> qq_spectrum(const AffineMap& m)
{
    if (!(m.beta > 0)) {
        throw InvalidArgument("qq_spectrum: beta must be positive");
    }
    const double g = m.gamma();
    const double a2 = m.alpha * m.alpha;
    // gamma^2 - 4 beta^2 written as a product of non-negative factors.
    const double disc = std::max(0.0, (a2 + (m.beta - 1) * (m.beta - 1)) * (a2 + (m.beta + 1) * (m.beta + 1)));
    const double hi = 0.5 * (g + std::sqrt(disc));
    const double lo = m.beta * m.beta / hi;
    return {lo, hi};
}

inline std::pair<Interval, Interval> qq_spectrum(const IntervalAffineMap& m)
{
    if (!(m.beta.lo() > 0)) {
        throw InvalidArgument("qq_spectrum: beta must be positive");
    }
    const Interval a2 = sqr(m.alpha);
    const Interval g = a2 + sqr(m.beta) + Interval(1.0);
    const Interval disc = (a2 + sqr(m.beta - Interval(1.0))) * (a2 + sqr(m.beta + Interval(1.0)));
    const Interval hi = Interval(0.5) * (g + sqrt(nonnegative_part(disc)));
    const Interval lo = sqr(m.beta) / hi;
    return {lo, hi};
}

/// Perturbation direction in the (r, theta) plane.
class Direction {
public:
    enum class Kind { radial, angular, general };

    /// e^r = (-1, 0).
    static Direction radial() { return {Kind::radial, -1.0, 0.0}; }
    /// e^theta = (0, -1).
    static Direction angular() { return {Kind::angular, 0.0, -1.0}; }
    static Direction general(double dr, double dtheta)
    {
        const double n = std::hypot(dr, dtheta);
        if (!(n > 0) || !std::isfinite(n)) {
            throw InvalidArgument("Direction: zero or non-finite vector");
        }
        return {Kind::general, dr / n, dtheta / n};
    }

    Kind kind() const { return kind_; }
    double dr() const { return dr_; }
    double dtheta() const { return dtheta_; }
    Direction negated() const { return general(-dr_, -dtheta_); }

    std::string name() const
    {
        switch (kind_) {
        case Kind::radial: return "r";
        case Kind::angular: return "theta";
        default: return "general";
        }
    }

private:
    Direction(Kind k, double dr, double dtheta) : kind_(k), dr_(dr), dtheta_(dtheta) {}
    Kind kind_;
    double dr_;
    double dtheta_;
};

inline ShapeParam shifted(const ShapeParam& p, const Direction& e, double t)
{
    return {p.r() + t * e.dr(), p.theta() + t * e.dtheta()};
}

/// p + t e for every t in the interval.
inline ShapeEnclosure shifted(const ShapeParam& p, const Direction& e, const Interval& t)
{
    ShapeEnclosure s{Interval(p.r()) + t * Interval(e.dr()), Interval(p.theta()) + t * Interval(e.dtheta())};
    require_valid(s);
    return s;
}

struct SymMatrix2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    std::pair<double, double> eigenvalues() const
    {
        const double c = 0.5 * (a11 + a22);
        const double d = std::hypot(0.5 * (a11 - a22), a12);
        return {c - d, c + d};
    }
    double spectral_norm() const
    {
        const auto [lo, hi] = eigenvalues();
        return std::max(std::abs(lo), std::abs(hi));
    }
    SymMatrix2 operator-() const { return {-a11, -a12, -a22}; }
};

inline IntervalSymMatrix to_interval(const SymMatrix2& m)
{
    IntervalSymMatrix out(2);
    out(0, 0) = m.a11;
    out(0, 1) = m.a12;
    out(1, 1) = m.a22;
    return out;
}

/// (S^{-1} S^{-T} - I) / t for the map S from T^p to T^{p + t e}, in floating point.
inline SymMatrix2 perturbation_matrix_point(const Direction& e, const ShapeParam& p, double t)
{
    if (!(t > 0)) {
        throw InvalidArgument("perturbation_matrix_point: t must be positive");
    }
    const AffineMap s = transform_between(p, shifted(p, e, t));
    const double b2 = s.beta * s.beta;
    return {s.alpha * s.alpha / b2 / t, -s.alpha / b2 / t, (1.0 / b2 - 1.0) / t};
}

/// Limit of P_t^e as t -> 0 for any direction.
inline SymMatrix2 limit_perturbation(const Direction& e, const ShapeParam& p)
{
    const double st = std::sin(p.theta());
    const double ct = std::cos(p.theta());
    const double da = (e.dr() * ct - p.r() * st * e.dtheta()) / (p.r() * st);
    const double db = (e.dr() * st + p.r() * ct * e.dtheta()) / (p.r() * st);
    return {0.0, -da, -2.0 * db};
}

/// Enclosure of P_t^e over every t in `t` (t = [0, 0] gives the limit P^e).
/// Only e^r and e^theta have closed forms valid down to t = 0.
inline IntervalSymMatrix perturbation_matrix(const Direction& e, const ShapeParam& p, const Interval& t)
{
    if (t.lo() < 0) {
        throw InvalidArgument("perturbation_matrix: t must be non-negative");
    }
    const Interval r(p.r());
    const Interval th(p.theta());
    IntervalSymMatrix m(2);
    switch (e.kind()) {
    case Direction::Kind::radial: {
        if (!(t.hi() < p.r())) {
            throw DegenerateShape("perturbation_matrix: r - t must stay positive");
        }
        const Interval cot = cos(th) / sin(th);
        const Interval d = sqr(r - t);
        m(0, 0) = t * sqr(cot) / d;
        m(0, 1) = r * cot / d;
        m(1, 1) = (Interval(2.0) * r - t) / d;
        return m;
    }
    case Direction::Kind::angular: {
        if (!(t.hi() < p.theta())) {
            throw DegenerateShape("perturbation_matrix: theta - t must stay positive");
        }
        const Interval tt = th - t;
        // cos(theta - t) - cos(theta) = t sin(a) for some a in [theta - t, theta].
        const Interval s = sin(Interval::hull(tt, th));
        const Interval d = sqr(sin(tt));
        m(0, 0) = t * sqr(s) / d;
        m(0, 1) = -(s * sin(th)) / d;
        m(1, 1) = s * (cos(tt) + cos(th)) / d;
        return m;
    }
    default:
        throw InvalidArgument("perturbation_matrix: verified enclosure exists only for e^r and e^theta");
    }
}

} // namespace eigshape
