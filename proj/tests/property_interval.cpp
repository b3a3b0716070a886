#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <random>

#include "eigshape/eigensolve.hpp"
#include "eigshape/interval.hpp"

using namespace eigshape;
using Big = boost::multiprecision::cpp_bin_float_100;

namespace {

double random_double(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-60, 60);
    return std::ldexp(mant(rng), ex(rng));
}

Interval random_interval(std::mt19937_64& rng)
{
    const double a = random_double(rng);
    const double b = rng() % 4 == 0 ? a : random_double(rng);
    return {std::min(a, b), std::max(a, b)};
}

bool encloses(const Interval& x, const Big& v)
{
    return Big(x.lo()) <= v && v <= Big(x.hi());
}

} // namespace

TEST(IntervalProperty, ArithmeticEnclosesHighPrecisionResult)
{
    std::mt19937_64 rng(2024);
    constexpr int kOps = 200000;
    for (int i = 0; i < kOps; ++i) {
        const Interval x = random_interval(rng);
        const Interval y = random_interval(rng);
        // Endpoint combinations give the exact extrema for + - * /.
        for (double a : {x.lo(), x.hi()}) {
            for (double b : {y.lo(), y.hi()}) {
                ASSERT_TRUE(encloses(x + y, Big(a) + Big(b)));
                ASSERT_TRUE(encloses(x - y, Big(a) - Big(b)));
                ASSERT_TRUE(encloses(x * y, Big(a) * Big(b)));
                if (!y.contains_zero()) {
                    ASSERT_TRUE(encloses(x / y, Big(a) / Big(b)));
                }
            }
        }
        const Interval ax = abs(x);
        ASSERT_TRUE(encloses(sqrt(ax), sqrt(Big(ax.lo()))));
        ASSERT_TRUE(encloses(sqrt(ax), sqrt(Big(ax.hi()))));
        ASSERT_TRUE(encloses(sqr(x), Big(x.lo()) * Big(x.lo())));
        ASSERT_TRUE(encloses(sqr(x), Big(x.hi()) * Big(x.hi())));
    }
}

TEST(IntervalProperty, TrigEnclosesSamples)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> c(-10.0, 10.0);
    std::uniform_real_distribution<double> w(0.0, 2.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100000; ++i) {
        const double lo = c(rng);
        const Interval x(lo, lo + w(rng));
        const Interval s = sin(x);
        const Interval co = cos(x);
        for (int j = 0; j < 5; ++j) {
            const double t = std::min(x.hi(), x.lo() + u(rng) * (x.hi() - x.lo()));
            ASSERT_TRUE(encloses(s, boost::multiprecision::sin(Big(t))));
            ASSERT_TRUE(encloses(co, boost::multiprecision::cos(Big(t))));
        }
    }
}

TEST(IntervalProperty, Sym2EigenvaluesEncloseSampledMatrices)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> v(-100.0, 100.0);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100000; ++i) {
        IntervalSymMatrix a(2);
        for (auto [r, c] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
            const double lo = v(rng);
            a(r, c) = Interval(lo, lo + (rng() % 3 == 0 ? 0.0 : w(rng)));
        }
        const auto [l0, l1] = sym2_interval_eig(a);
        const double norm = spectral_upper(a);
        Eigen::Matrix2d m;
        for (int j = 0; j < 3; ++j) {
            auto pick = [&](const Interval& x) { return std::min(x.hi(), x.lo() + u(rng) * (x.hi() - x.lo())); };
            m(0, 0) = pick(a(0, 0));
            m(1, 1) = pick(a(1, 1));
            m(0, 1) = m(1, 0) = pick(a(0, 1));
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
            const double tol = 1e-13 * (std::abs(es.eigenvalues()(1)) + std::abs(es.eigenvalues()(0)));
            ASSERT_GE(es.eigenvalues()(0), l0.lo() - tol);
            ASSERT_LE(es.eigenvalues()(0), l0.hi() + tol);
            ASSERT_GE(es.eigenvalues()(1), l1.lo() - tol);
            ASSERT_LE(es.eigenvalues()(1), l1.hi() + tol);
            ASSERT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), norm * (1 + 1e-14));
            if (determinant_positive_certified(a)) {
                ASSERT_GT(m.determinant(), 0.0);
            }
            const Interval det = determinant_2x2(a);
            ASSERT_TRUE(det.contains(m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1)) ||
                        std::abs(m.determinant()) < 1e-9 * (1 + m.squaredNorm()));
        }
    }
}

TEST(IntervalProperty, NearIdentityDeterminantCertified)
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    int certified = 0;
    for (int i = 0; i < 100000; ++i) {
        IntervalSymMatrix a = IntervalSymMatrix::identity(2);
        a(0, 0) = 1.0 + d(rng);
        a(1, 1) = 1.0 + d(rng);
        a(0, 1) = d(rng);
        if (determinant_positive_certified(a)) {
            ++certified;
            ASSERT_GT(determinant_2x2(a).lo(), 0.0);
            const IntervalSymMatrix inv = inverse_2x2(a);
            const Eigen::MatrixXd fi = a.midpoint().inverse();
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 2; ++c) {
                    const Interval& x = inv(r, c);
                    ASSERT_GE(fi(r, c), x.lo() - 1e-14 * x.mag());
                    ASSERT_LE(fi(r, c), x.hi() + 1e-14 * x.mag());
                }
            }
        }
    }
    EXPECT_GT(certified, 50000);
}
