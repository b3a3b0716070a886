#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "eigshape/interval.hpp"

using eigshape::Interval;
using eigshape::IntervalSymMatrix;

TEST(Interval, RejectsInvertedEndpoints)
{
    EXPECT_THROW(Interval(2.0, 1.0), eigshape::InvalidArgument);
}

TEST(Interval, AdditionOfPointEndpoints)
{
    const Interval s = Interval(1, 2) + Interval(3, 4);
    EXPECT_EQ(s.lo(), 4.0);
    EXPECT_EQ(s.hi(), 6.0);
}

TEST(Interval, SqrtOfPerfectSquares)
{
    const Interval s = sqrt(Interval(4, 9));
    EXPECT_EQ(s.lo(), 2.0);
    EXPECT_EQ(s.hi(), 3.0);
}

TEST(Interval, ProductWithSignChange)
{
    const Interval p = Interval(1, 2) * Interval(-1, 1);
    EXPECT_EQ(p.lo(), -2.0);
    EXPECT_EQ(p.hi(), 2.0);
}

TEST(Interval, InexactOperationsAreOutward)
{
    const Interval third = Interval(1.0) / Interval(3.0);
    EXPECT_LT(third.lo(), third.hi());
    EXPECT_LE(third.lo(), 1.0 / 3.0);
    EXPECT_GE(third.hi(), 1.0 / 3.0);
    EXPECT_LE(third.hi(), std::nextafter(third.lo(), 1.0));

    const Interval tenth = Interval(0.1) + Interval(0.2);
    EXPECT_TRUE(tenth.contains(0.30000000000000004) || tenth.contains(0.3));
    EXPECT_LT(tenth.lo(), tenth.hi());
}

TEST(Interval, DivisionByZeroContainingThrows)
{
    EXPECT_THROW(Interval(1.0) / Interval(-1, 1), eigshape::DivisionByZeroInterval);
}

TEST(Interval, NegativeSqrtThrowsAndClampFlags)
{
    EXPECT_THROW(sqrt(Interval(-2, -1)), eigshape::NegativeSqrt);
    EXPECT_THROW(sqrt(Interval(-1, 4)), eigshape::NegativeSqrt);
    bool clamped = false;
    const Interval s = eigshape::sqrt_clamped(Interval(-1e-20, 4), clamped);
    EXPECT_TRUE(clamped);
    EXPECT_EQ(s.lo(), 0.0);
    EXPECT_EQ(s.hi(), 2.0);
}

TEST(Interval, SquareOfStraddlingInterval)
{
    const Interval s = sqr(Interval(-2, 1));
    EXPECT_EQ(s.lo(), 0.0);
    EXPECT_EQ(s.hi(), 4.0);
}

TEST(Interval, TrigEnclosesExtrema)
{
    const Interval c = cos(Interval(-0.1, 0.1));
    EXPECT_EQ(c.hi(), 1.0);
    EXPECT_LE(c.lo(), std::cos(0.1));
    const Interval s = sin(Interval(1.5, 1.7));
    EXPECT_EQ(s.hi(), 1.0);
    const Interval pi3 = cos(Interval::pi() / Interval(3.0));
    EXPECT_TRUE(pi3.contains(0.5));
}

TEST(Interval, PiEnclosure)
{
    const Interval p = Interval::pi();
    EXPECT_LE(p.lo(), M_PI);
    EXPECT_GT(p.hi(), 3.14159265358979323);
    EXPECT_LE(p.width(), 1e-15);
}

TEST(IntervalMatrix, FrobeniusOfIdentity)
{
    const double f = eigshape::frobenius_upper(IntervalSymMatrix::identity(2));
    EXPECT_GE(f, std::sqrt(2.0));
    EXPECT_LE(f, std::nextafter(std::sqrt(2.0), 2.0));
}

TEST(IntervalMatrix, InverseOfIdentity)
{
    const IntervalSymMatrix inv = eigshape::inverse_2x2(IntervalSymMatrix::identity(2));
    EXPECT_EQ(inv(0, 0).lo(), 1.0);
    EXPECT_EQ(inv(0, 0).hi(), 1.0);
    EXPECT_EQ(inv(0, 1).lo(), 0.0);
    EXPECT_EQ(inv(0, 1).hi(), 0.0);
}

TEST(IntervalMatrix, InverseOfPerturbedIdentity)
{
    IntervalSymMatrix a(2);
    a(0, 0) = Interval(0.999, 1.001);
    a(1, 1) = Interval(0.999, 1.001);
    a(0, 1) = Interval(-0.001, 0.001);
    const IntervalSymMatrix inv = eigshape::inverse_2x2(a);
    for (int i = 0; i < 2; ++i) {
        EXPECT_GE(inv(i, i).lo(), 0.997);
        EXPECT_LE(inv(i, i).hi(), 1.003);
    }
    Eigen::Matrix2d pt;
    pt << 1.0005, -0.0007, -0.0007, 0.9991;
    EXPECT_TRUE(inv.contains(pt.inverse()));
}

TEST(IntervalMatrix, SingularEnclosureRejected)
{
    IntervalSymMatrix a(2);
    a(0, 0) = Interval(-1, 1);
    a(1, 1) = Interval(1);
    EXPECT_THROW(eigshape::inverse_2x2(a), eigshape::SingularEnclosure);
}

TEST(IntervalMatrix, SpectralUpperDominatesPointNorm)
{
    Eigen::Matrix2d p;
    p << 89.1793, 17.4075, 17.4075, 156.4683;
    const IntervalSymMatrix a = IntervalSymMatrix::from_point(p);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(p);
    EXPECT_GE(eigshape::spectral_upper(a), es.eigenvalues().cwiseAbs().maxCoeff());
    EXPECT_LE(eigshape::spectral_upper(a), es.eigenvalues().cwiseAbs().maxCoeff() * (1 + 1e-14));
}

TEST(IntervalMatrix, DeterminantSignTest)
{
    IntervalSymMatrix a = IntervalSymMatrix::identity(2);
    a(0, 1) = Interval(-0.3, 0.3);
    EXPECT_TRUE(eigshape::determinant_positive_certified(a));
    a(0, 1) = Interval(-0.8, 0.8);
    EXPECT_FALSE(eigshape::determinant_positive_certified(a));
}
