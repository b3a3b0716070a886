#include <gtest/gtest.h>

#include <random>

#include "eigshape/subspace_error.hpp"

using namespace eigshape;

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Pencil (K, M) with prescribed spectrum and M-orthonormal eigenvectors phi.
struct ModelPencil {
    MatrixXd k;
    MatrixXd m;
    MatrixXd phi;
    VectorXd lambda;
};

MatrixXd m_orthonormalize(MatrixXd x, const MatrixXd& m)
{
    for (int j = 0; j < x.cols(); ++j) {
        for (int i = 0; i < j; ++i) {
            x.col(j) -= x.col(i).dot(m * x.col(j)) * x.col(i);
        }
        x.col(j) /= std::sqrt(x.col(j).dot(m * x.col(j)));
    }
    return x;
}

MatrixXd gaussian(int r, int c, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    MatrixXd a(r, c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            a(i, j) = g(rng);
        }
    }
    return a;
}

ModelPencil make_pencil(const VectorXd& lambda, std::mt19937_64& rng)
{
    const int n = static_cast<int>(lambda.size());
    const MatrixXd g = gaussian(n, n, rng);
    ModelPencil p;
    p.m = g * g.transpose() / n + MatrixXd::Identity(n, n);
    p.phi = m_orthonormalize(gaussian(n, n, rng), p.m);
    p.lambda = lambda;
    const MatrixXd mp = p.m * p.phi;
    p.k = mp * lambda.asDiagonal() * mp.transpose();
    p.k = (0.5 * (p.k + p.k.transpose())).eval();
    return p;
}

struct Ritz {
    MatrixXd vectors; ///< M-orthonormal
    VectorXd values;
};

/// Rayleigh-Ritz on the span of the first `dim` eigenvectors plus noise of size sigma.
Ritz rayleigh_ritz(const ModelPencil& p, int dim, double sigma, std::mt19937_64& rng)
{
    const int n = static_cast<int>(p.k.rows());
    MatrixXd v = p.phi.leftCols(dim) + sigma * gaussian(n, dim, rng);
    v = m_orthonormalize(v, p.m);
    const MatrixXd kr = v.transpose() * p.k * v;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (kr + kr.transpose()));
    return {v * es.eigenvectors(), es.eigenvalues()};
}

/// max over unit x in span(X) of the distance to span(Y), in the norm of g.
double subspace_distance(const MatrixXd& x, const MatrixXd& y, const MatrixXd& g)
{
    const MatrixXd xo = m_orthonormalize(x, g);
    const MatrixXd yo = m_orthonormalize(y, g);
    Eigen::JacobiSVD<MatrixXd> svd(yo.transpose() * g * xo);
    const double s = svd.singularValues().minCoeff();
    return std::sqrt(std::max(0.0, 1.0 - s * s));
}

VectorXd spectrum(std::initializer_list<double> v)
{
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

} // namespace

TEST(SubspaceProperty, FirstClusterBoundsDominateTrueDistances)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> sig(1e-4, 0.05);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 6 + trial % 7;
        VectorXd lambda(n);
        lambda(0) = 1.0;
        lambda(1) = 1.0;
        for (int i = 2; i < n; ++i) {
            lambda(i) = 2.0 + i;
        }
        const ModelPencil p = make_pencil(lambda, rng);
        const Ritz r = rayleigh_ritz(p, 2, sig(rng), rng);
        const double lh = r.values(1);
        const ClusterData cd{Cluster{1, 2}, Interval(1.0), Interval(lh), Interval(lambda(2))};
        const auto rec = delta_bounds_recursive({cd}, {}, {});
        const MatrixXd e = p.phi.leftCols(2);
        const double db = subspace_distance(r.vectors, e, p.m);
        const double da = subspace_distance(r.vectors, e, p.k);
        EXPECT_GE(rec[0].delta_b.hi() * (1 + 1e-10), db);
        EXPECT_GE(rec[0].delta_a.hi() * (1 + 1e-10), da);
        if (db < 0.9) {
            const DeltaA a = delta_a_from_b(Interval(1.0), Interval(1.0), Interval(lh), Interval(db));
            EXPECT_GE(a.delta_a.hi() * (1 + 1e-10) + 1e-12, da);
            EXPECT_GE(bar_delta_b(Interval(db)).hi(), db);
        }
        ++checked;
    }
    EXPECT_EQ(checked, 100);
}

TEST(SubspaceProperty, SecondClusterRecursion)
{
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> sig(1e-4, 0.03);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 8 + trial % 5;
        VectorXd lambda(n);
        lambda(0) = 1.0;
        lambda(1) = 3.0;
        lambda(2) = 3.0;
        for (int i = 3; i < n; ++i) {
            lambda(i) = 4.0 + i;
        }
        const ModelPencil p = make_pencil(lambda, rng);
        const Ritz r = rayleigh_ritz(p, 3, sig(rng), rng);
        const ClusterData c1{Cluster{1, 1}, Interval(1.0), Interval(r.values(0)), Interval(3.0)};
        const ClusterData c2{Cluster{2, 3}, Interval(3.0), Interval(r.values(2)), Interval(lambda(3))};
        const auto rec = delta_bounds_recursive({c1, c2}, {{}, {Interval(0.0)}}, {{}, {Interval(0.0)}});
        const MatrixXd x2 = r.vectors.middleCols(1, 2);
        const MatrixXd e2 = p.phi.middleCols(1, 2);
        EXPECT_GE(rec[0].delta_b.hi() * (1 + 1e-10), subspace_distance(r.vectors.leftCols(1), p.phi.leftCols(1), p.m));
        EXPECT_GE(rec[1].delta_b.hi() * (1 + 1e-10), subspace_distance(x2, e2, p.m));
        EXPECT_GE(rec[1].delta_a.hi() * (1 + 1e-10), subspace_distance(x2, e2, p.k));
    }
}

TEST(SubspaceProperty, GramSchmidtCorrectionBounded)
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> sig(1e-4, 0.2);
    int used = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 6 + trial % 7;
        VectorXd lambda(n);
        lambda(0) = 2.0;
        lambda(1) = 2.0;
        for (int i = 2; i < n; ++i) {
            lambda(i) = 3.0 + i;
        }
        const ModelPencil p = make_pencil(lambda, rng);
        const Ritz r = rayleigh_ritz(p, 2, sig(rng), rng);
        const MatrixXd e = p.phi.leftCols(2);
        const double db = subspace_distance(r.vectors, e, p.m);
        if (!(db < 0.4)) {
            continue;
        }
        ++used;
        // Project the Ritz vectors onto the exact space, then Gram-Schmidt.
        const MatrixXd proj = e * (e.transpose() * p.m * r.vectors);
        const MatrixXd u = m_orthonormalize(proj, p.m);
        const OrthonormalCorrection oc =
            orthonormal_correction(Interval(db), Interval(2.0), Interval(2.0), Interval(r.values(1)));
        for (int i = 0; i < 2; ++i) {
            const VectorXd d = u.col(i) - r.vectors.col(i);
            EXPECT_LE(d.dot(p.m * d), oc.err_star_b.hi() * (1 + 1e-10));
            EXPECT_LE(std::sqrt(d.dot(p.k * d)), oc.err_star_a.hi() * (1 + 1e-10));
        }
    }
    EXPECT_GT(used, 50);
}

TEST(SubspaceProperty, MonotoneInInputs)
{
    double prev_bar = 0.0;
    double prev_err = 0.0;
    double prev_da = 0.0;
    for (int i = 0; i <= 49; ++i) {
        const double d = 0.49 * i / 49.0;
        const Interval bd = bar_delta_b(Interval(d));
        const OrthonormalCorrection oc = orthonormal_correction(Interval(d), Interval(1.0), Interval(1.0), Interval(1.0));
        const DeltaA da = delta_a_from_b(Interval(1.0), Interval(1.0), Interval(1.0), Interval(d));
        EXPECT_GE(bd.hi(), d);
        EXPECT_GE(bd.hi(), prev_bar);
        EXPECT_GE(oc.err_star_b.hi(), prev_err);
        EXPECT_GE(da.delta_a.hi(), prev_da);
        prev_bar = bd.hi();
        prev_err = oc.err_star_b.hi();
        prev_da = da.delta_a.hi();
    }
    for (double lh : {1.0, 1.1, 1.5, 2.0}) {
        for (double rho : {2.5, 3.0, 5.0}) {
            const auto a = delta_bounds_recursive({{Cluster{1, 1}, Interval(1.0), Interval(lh), Interval(rho)}}, {}, {});
            const auto b =
                delta_bounds_recursive({{Cluster{1, 1}, Interval(1.0), Interval(lh + 0.1), Interval(rho)}}, {}, {});
            const auto c =
                delta_bounds_recursive({{Cluster{1, 1}, Interval(1.0), Interval(lh), Interval(rho + 1.0)}}, {}, {});
            EXPECT_GE(b[0].delta_b.hi(), a[0].delta_b.hi());
            EXPECT_LE(c[0].delta_b.hi(), a[0].delta_b.hi());
        }
    }
}

TEST(SubspaceProperty, TripleClusterModel)
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const ModelPencil p = make_pencil(spectrum({5.0, 5.0, 5.0, 9.0, 12.0, 15.0, 20.0, 30.0}), rng);
        const Ritz r = rayleigh_ritz(p, 3, 0.01, rng);
        const auto rec =
            delta_bounds_recursive({{Cluster{1, 3}, Interval(5.0), Interval(r.values(2)), Interval(9.0)}}, {}, {});
        const MatrixXd e = p.phi.leftCols(3);
        EXPECT_GE(rec[0].delta_b.hi() * (1 + 1e-10), subspace_distance(r.vectors, e, p.m));
        EXPECT_GE(rec[0].delta_a.hi() * (1 + 1e-10), subspace_distance(r.vectors, e, p.k));
        EXPECT_EQ(linear_independence_check(bar_delta_b(rec[0].delta_b), 3), 6 * bar_delta_b(rec[0].delta_b).hi() < 1);
    }
}
