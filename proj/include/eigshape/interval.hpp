#pragma once

// Outward-rounded interval arithmetic.
//
// Every operation first evaluates in round-to-nearest and then uses an
// error-free transformation (TwoSum, FMA-based TwoProduct, exact division and
// square-root remainders) to decide whether the rounded value lies above or
// below the exact one. Endpoints are moved by one ulp only in the direction
// that is required, so results are the tightest directed roundings and no
// floating-point environment state is touched. This needs strict IEEE
// semantics: do not compile with -ffast-math or FMA contraction.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

#include "errors.hpp"

namespace eigshape {

namespace rounding {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude the error terms of the transformations may underflow.
inline constexpr double kTiny = 1e-290;

inline double prev(double x) { return std::nextafter(x, -kInf); }
inline double next(double x) { return std::nextafter(x, kInf); }

inline double add_down(double a, double b)
{
    const double s = a + b;
    if (!std::isfinite(s)) {
        return std::isnan(s) ? s : (s > 0 ? std::numeric_limits<double>::max() : s);
    }
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return err < 0 ? prev(s) : s;
}

inline double add_up(double a, double b) { return -add_down(-a, -b); }
inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b)
{
    if (a == 0 || b == 0) {
        return 0.0;
    }
    const double p = a * b;
    if (!std::isfinite(p)) {
        return std::isnan(p) ? p : (p > 0 ? std::numeric_limits<double>::max() : p);
    }
    if (std::abs(p) < kTiny) {
        return prev(p);
    }
    const double err = std::fma(a, b, -p);
    return err < 0 ? prev(p) : p;
}

inline double mul_up(double a, double b) { return -mul_down(-a, b); }

inline double div_down(double a, double b)
{
    if (a == 0) {
        return 0.0;
    }
    const double q = a / b;
    if (!std::isfinite(q)) {
        return std::isnan(q) ? q : (q > 0 ? std::numeric_limits<double>::max() : q);
    }
    if (std::abs(q) < kTiny || std::abs(a) < kTiny) {
        return prev(q);
    }
    // a - q*b is exactly representable; the exact quotient is q + r/b.
    const double r = std::fma(-q, b, a);
    const bool exact_below = (r < 0) != (b < 0) && r != 0;
    return exact_below ? prev(q) : q;
}

inline double div_up(double a, double b) { return -div_down(-a, b); }

inline double sqrt_down(double x)
{
    if (x == 0) {
        return 0.0;
    }
    const double s = std::sqrt(x);
    if (!std::isfinite(s)) {
        return s;
    }
    if (x < kTiny) {
        return prev(s);
    }
    const double r = std::fma(-s, s, x);
    return r < 0 ? prev(s) : s;
}

inline double sqrt_up(double x)
{
    if (x == 0) {
        return 0.0;
    }
    const double s = std::sqrt(x);
    if (!std::isfinite(s)) {
        return s;
    }
    if (x < kTiny) {
        return next(s);
    }
    const double r = std::fma(-s, s, x);
    return r > 0 ? next(s) : s;
}

} // namespace rounding

/// Closed real interval [lo, hi] with outward-rounded arithmetic.
///
/// A double converts implicitly to the point interval holding exactly that
/// binary value. Decimal constants that are not representable (0.1, 0.493)
/// must go through Interval::enclose or Interval::at_most.
class Interval {
public:
    constexpr Interval() = default;
    Interval(double v) // NOLINT(google-explicit-constructor)
        : lo_(v), hi_(v)
    {
        if (std::isnan(v)) {
            throw InvalidArgument("Interval: NaN endpoint");
        }
    }
    Interval(double lo, double hi) : lo_(lo), hi_(hi)
    {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
            throw InvalidArgument("Interval: invalid endpoints");
        }
    }

    /// One-ulp neighbourhood of x; encloses the decimal literal x was parsed from.
    static Interval enclose(double x) { return {rounding::prev(x), rounding::next(x)}; }
    /// [0, c] with c rounded up, for constants known only as upper bounds.
    static Interval at_most(double c) { return {0.0, rounding::next(c)}; }
    static Interval hull(const Interval& a, const Interval& b)
    {
        return {std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_)};
    }
    static Interval pi() { return {std::numbers::pi, rounding::next(std::numbers::pi)}; }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double mid() const { return lo_ == hi_ ? lo_ : 0.5 * lo_ + 0.5 * hi_; }
    /// Upper bound of the half width.
    double rad() const { return std::max(rounding::sub_up(hi_, mid()), rounding::sub_up(mid(), lo_)); }
    double width() const { return rounding::sub_up(hi_, lo_); }
    /// max |x| over the interval.
    double mag() const { return std::max(std::abs(lo_), std::abs(hi_)); }
    /// min |x| over the interval.
    double mig() const
    {
        if (lo_ <= 0 && hi_ >= 0) {
            return 0.0;
        }
        return std::min(std::abs(lo_), std::abs(hi_));
    }
    bool is_point() const { return lo_ == hi_; }
    bool contains(double x) const { return lo_ <= x && x <= hi_; }
    bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool contains_zero() const { return lo_ <= 0 && hi_ >= 0; }
    bool intersects(const Interval& o) const { return lo_ <= o.hi_ && o.lo_ <= hi_; }
    /// Strictly below every element of o.
    bool certainly_less(const Interval& o) const { return hi_ < o.lo_; }

    Interval intersect(const Interval& o) const
    {
        if (!intersects(o)) {
            throw InvalidArgument("Interval::intersect: disjoint intervals");
        }
        return {std::max(lo_, o.lo_), std::min(hi_, o.hi_)};
    }

    Interval operator-() const { return {-hi_, -lo_}; }
    Interval& operator+=(const Interval& o);
    Interval& operator-=(const Interval& o);
    Interval& operator*=(const Interval& o);
    Interval& operator/=(const Interval& o);

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

inline Interval operator+(const Interval& a, const Interval& b)
{
    return {rounding::add_down(a.lo(), b.lo()), rounding::add_up(a.hi(), b.hi())};
}

inline Interval operator-(const Interval& a, const Interval& b)
{
    return {rounding::sub_down(a.lo(), b.hi()), rounding::sub_up(a.hi(), b.lo())};
}

inline Interval operator*(const Interval& a, const Interval& b)
{
    using namespace rounding;
    const double lo = std::min({mul_down(a.lo(), b.lo()), mul_down(a.lo(), b.hi()),
                                mul_down(a.hi(), b.lo()), mul_down(a.hi(), b.hi())});
    const double hi = std::max({mul_up(a.lo(), b.lo()), mul_up(a.lo(), b.hi()),
                                mul_up(a.hi(), b.lo()), mul_up(a.hi(), b.hi())});
    return {lo, hi};
}

inline Interval operator/(const Interval& a, const Interval& b)
{
    using namespace rounding;
    if (b.contains_zero()) {
        throw DivisionByZeroInterval("interval division by an interval containing zero");
    }
    const double lo = std::min({div_down(a.lo(), b.lo()), div_down(a.lo(), b.hi()),
                                div_down(a.hi(), b.lo()), div_down(a.hi(), b.hi())});
    const double hi = std::max({div_up(a.lo(), b.lo()), div_up(a.lo(), b.hi()),
                                div_up(a.hi(), b.lo()), div_up(a.hi(), b.hi())});
    return {lo, hi};
}

inline Interval& Interval::operator+=(const Interval& o) { return *this = *this + o; }
inline Interval& Interval::operator-=(const Interval& o) { return *this = *this - o; }
inline Interval& Interval::operator*=(const Interval& o) { return *this = *this * o; }
inline Interval& Interval::operator/=(const Interval& o) { return *this = *this / o; }

inline Interval sqr(const Interval& x)
{
    using namespace rounding;
    if (x.contains_zero()) {
        return {0.0, std::max(mul_up(x.lo(), x.lo()), mul_up(x.hi(), x.hi()))};
    }
    const double a = x.mig();
    const double b = x.mag();
    return {mul_down(a, a), mul_up(b, b)};
}

inline Interval sqrt(const Interval& x)
{
    if (x.lo() < 0) {
        throw NegativeSqrt("interval sqrt of an interval with negative part");
    }
    return {rounding::sqrt_down(x.lo()), rounding::sqrt_up(x.hi())};
}

/// sqrt over the non-negative part of x; sets `clamped` when lo < 0 was cut.
/// Throws if x lies entirely below zero.
inline Interval sqrt_clamped(const Interval& x, bool& clamped)
{
    if (x.hi() < 0) {
        throw NegativeSqrt("interval sqrt of a negative interval");
    }
    clamped = x.lo() < 0;
    return sqrt(Interval(std::max(0.0, x.lo()), x.hi()));
}

inline Interval sqrt_clamped(const Interval& x)
{
    bool ignored = false;
    return sqrt_clamped(x, ignored);
}

inline Interval abs(const Interval& x) { return {x.mig(), x.mag()}; }

inline Interval max(const Interval& a, const Interval& b)
{
    return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

inline Interval min(const Interval& a, const Interval& b)
{
    return {std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}

/// Non-negative part of x (the enclosure of max(x, 0)).
inline Interval nonnegative_part(const Interval& x) { return {std::max(0.0, x.lo()), std::max(0.0, x.hi())}; }

namespace detail {

// libm sin/cos are assumed accurate to within one ulp; widen by two.
inline double widen_down(double v) { return std::max(-1.0, rounding::prev(rounding::prev(v))); }
inline double widen_up(double v) { return std::min(1.0, rounding::next(rounding::next(v))); }

// Encloses f over x where f has extrema at offset + k*pi with value sign(k).
template <class F>
Interval trig_range(const Interval& x, F f, double offset_in_halves)
{
    const Interval pi = Interval::pi();
    if (x.width() >= 6.0) {
        return {-1.0, 1.0};
    }
    double lo = std::min(widen_down(f(x.lo())), widen_down(f(x.hi())));
    double hi = std::max(widen_up(f(x.lo())), widen_up(f(x.hi())));
    const long kmin = static_cast<long>(std::floor(x.lo() / std::numbers::pi)) - 2;
    const long kmax = static_cast<long>(std::ceil(x.hi() / std::numbers::pi)) + 2;
    for (long k = kmin; k <= kmax; ++k) {
        const Interval where = (Interval(static_cast<double>(k)) + Interval(offset_in_halves * 0.5)) * pi;
        if (where.intersects(x)) {
            const bool even = (k % 2 == 0);
            if (even) {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
        }
    }
    return {lo, hi};
}

} // namespace detail

/// Enclosure of cos over x (maxima at 2k*pi, minima at (2k+1)*pi).
inline Interval cos(const Interval& x)
{
    return detail::trig_range(x, [](double v) { return std::cos(v); }, 0.0);
}

/// Enclosure of sin over x (maxima at pi/2 + 2k*pi).
inline Interval sin(const Interval& x)
{
    return detail::trig_range(x, [](double v) { return std::sin(v); }, 1.0);
}

inline std::ostream& operator<<(std::ostream& os, const Interval& x)
{
    return os << '[' << x.lo() << ", " << x.hi() << ']';
}

/// Symmetric matrix of intervals; entry (i,j) and (j,i) are the same object.
class IntervalSymMatrix {
public:
    IntervalSymMatrix() = default;
    explicit IntervalSymMatrix(int n) : n_(n), packed_(static_cast<std::size_t>(n * (n + 1) / 2), Interval(0.0))
    {
        if (n < 0) {
            throw DimensionMismatch("IntervalSymMatrix: negative size");
        }
    }

    static IntervalSymMatrix identity(int n)
    {
        IntervalSymMatrix m(n);
        for (int i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    /// Point enclosure of the symmetric part of a (a is assumed symmetric).
    static IntervalSymMatrix from_point(const Eigen::MatrixXd& a)
    {
        if (a.rows() != a.cols()) {
            throw DimensionMismatch("IntervalSymMatrix::from_point: not square");
        }
        IntervalSymMatrix m(static_cast<int>(a.rows()));
        for (int i = 0; i < m.size(); ++i) {
            for (int j = i; j < m.size(); ++j) {
                m(i, j) = Interval::hull(a(i, j), a(j, i));
            }
        }
        return m;
    }

    int size() const { return n_; }

    Interval& operator()(int i, int j) { return packed_[index(i, j)]; }
    const Interval& operator()(int i, int j) const { return packed_[index(i, j)]; }

    bool contains(const Eigen::MatrixXd& a) const
    {
        if (a.rows() != n_ || a.cols() != n_) {
            return false;
        }
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                if (!(*this)(i, j).contains(a(i, j))) {
                    return false;
                }
            }
        }
        return true;
    }

    Eigen::MatrixXd midpoint() const
    {
        Eigen::MatrixXd m(n_, n_);
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                m(i, j) = (*this)(i, j).mid();
            }
        }
        return m;
    }

    /// Entrywise hull; used to accumulate enclosures over parameter ranges.
    static IntervalSymMatrix hull(const IntervalSymMatrix& a, const IntervalSymMatrix& b)
    {
        check_same(a, b);
        IntervalSymMatrix m(a.n_);
        for (std::size_t k = 0; k < a.packed_.size(); ++k) {
            m.packed_[k] = Interval::hull(a.packed_[k], b.packed_[k]);
        }
        return m;
    }

    friend IntervalSymMatrix operator+(const IntervalSymMatrix& a, const IntervalSymMatrix& b)
    {
        check_same(a, b);
        IntervalSymMatrix m(a.n_);
        for (std::size_t k = 0; k < a.packed_.size(); ++k) {
            m.packed_[k] = a.packed_[k] + b.packed_[k];
        }
        return m;
    }

    friend IntervalSymMatrix operator-(const IntervalSymMatrix& a, const IntervalSymMatrix& b)
    {
        check_same(a, b);
        IntervalSymMatrix m(a.n_);
        for (std::size_t k = 0; k < a.packed_.size(); ++k) {
            m.packed_[k] = a.packed_[k] - b.packed_[k];
        }
        return m;
    }

    friend IntervalSymMatrix operator*(const Interval& s, const IntervalSymMatrix& a)
    {
        IntervalSymMatrix m(a.n_);
        for (std::size_t k = 0; k < a.packed_.size(); ++k) {
            m.packed_[k] = s * a.packed_[k];
        }
        return m;
    }

private:
    std::size_t index(int i, int j) const
    {
        if (i > j) {
            std::swap(i, j);
        }
        if (i < 0 || j >= n_) {
            throw DimensionMismatch("IntervalSymMatrix: index out of range");
        }
        return static_cast<std::size_t>(i * n_ - i * (i - 1) / 2 + (j - i));
    }

    static void check_same(const IntervalSymMatrix& a, const IntervalSymMatrix& b)
    {
        if (a.n_ != b.n_) {
            throw DimensionMismatch("IntervalSymMatrix: size mismatch");
        }
    }

    int n_ = 0;
    std::vector<Interval> packed_;
};

/// Upper bound of the Frobenius norm over all point matrices in a.
inline double frobenius_upper(const IntervalSymMatrix& a)
{
    using namespace rounding;
    double sum = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        for (int j = 0; j < a.size(); ++j) {
            const double m = a(i, j).mag();
            sum = add_up(sum, mul_up(m, m));
        }
    }
    return sqrt_up(sum);
}

/// Half-trace and half-spread of a symmetric 2x2 enclosure:
/// eigenvalues are centre -/+ spread.
struct Sym2Spectrum {
    Interval centre;
    Interval spread;
};

inline Sym2Spectrum sym2_spectrum(const IntervalSymMatrix& a)
{
    if (a.size() != 2) {
        throw DimensionMismatch("sym2_spectrum: matrix must be 2x2");
    }
    const Interval half(0.5);
    const Interval centre = half * (a(0, 0) + a(1, 1));
    const Interval spread = sqrt(sqr(half * (a(0, 0) - a(1, 1))) + sqr(a(0, 1)));
    return {centre, spread};
}

/// Upper bound of the spectral norm over all point matrices in a.
inline double spectral_upper(const IntervalSymMatrix& a)
{
    if (a.size() == 1) {
        return a(0, 0).mag();
    }
    if (a.size() == 2) {
        const auto [centre, spread] = sym2_spectrum(a);
        return std::min(rounding::add_up(centre.mag(), spread.hi()), frobenius_upper(a));
    }
    return frobenius_upper(a);
}

inline Interval determinant_2x2(const IntervalSymMatrix& a)
{
    if (a.size() != 2) {
        throw DimensionMismatch("determinant_2x2: matrix must be 2x2");
    }
    return a(0, 0) * a(1, 1) - sqr(a(0, 1));
}

/// Enclosure of the inverses of all point matrices in a (sizes 1 and 2).
///
/// Diagonal entries use the Schur-complement form 1/(a11 - a12^2/a22), in
/// which every entry occurs once, and are intersected with Cramer's rule.
inline IntervalSymMatrix inverse_2x2(const IntervalSymMatrix& a)
{
    if (a.size() == 1) {
        if (a(0, 0).contains_zero()) {
            throw SingularEnclosure("inverse: enclosure contains a singular matrix");
        }
        IntervalSymMatrix inv(1);
        inv(0, 0) = Interval(1.0) / a(0, 0);
        return inv;
    }
    const Interval det = determinant_2x2(a);
    if (det.contains_zero()) {
        throw SingularEnclosure("inverse_2x2: determinant enclosure contains zero");
    }
    IntervalSymMatrix inv(2);
    inv(0, 0) = a(1, 1) / det;
    inv(1, 1) = a(0, 0) / det;
    inv(0, 1) = -a(0, 1) / det;
    if (!a(0, 0).contains_zero() && !a(1, 1).contains_zero()) {
        const Interval schur0 = a(0, 0) - sqr(a(0, 1)) / a(1, 1);
        const Interval schur1 = a(1, 1) - sqr(a(0, 1)) / a(0, 0);
        if (!schur0.contains_zero() && !schur1.contains_zero()) {
            const Interval d0 = Interval(1.0) / schur0;
            const Interval d1 = Interval(1.0) / schur1;
            inv(0, 0) = inv(0, 0).intersect(d0);
            inv(1, 1) = inv(1, 1).intersect(d1);
            inv(0, 1) = inv(0, 1).intersect(-(a(0, 1) / a(0, 0)) * d1);
        }
    }
    return inv;
}

/// Sufficient test for det > 0 of every point matrix: ||A - I||_F < 1.
inline bool determinant_positive_certified(const IntervalSymMatrix& a)
{
    return frobenius_upper(a - IntervalSymMatrix::identity(a.size())) < 1.0;
}

} // namespace eigshape
