#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fem.hpp"
#include "interval.hpp"

namespace eigshape {

struct EigenSolveOptions {
    double tol = 1e-10;
    /// Below this dimension the pencil is solved densely.
    int dense_threshold = 500;
    int max_iterations = 2000;
    unsigned seed = 20240607u;
};

/// Smallest eigenpairs of a symmetric positive definite pencil (K, M).
struct DiscreteEigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors; // columns are M-orthonormal
    /// ||K x - lambda M x||_2 / (||M x||_2 max(1, lambda)).
    Eigen::VectorXd residuals;
    /// ||X^T M X - I||_F.
    double gram_error = 0.0;
    /// Per-pair enclosure radius from residual inflation (0 until inflated).
    Eigen::VectorXd radii;

    int size() const { return static_cast<int>(values.size()); }
    Interval enclosure(int i) const
    {
        const double l = values(i);
        const double r = radii.size() > i ? radii(i) : 0.0;
        return {rounding::sub_down(l, r), rounding::add_up(l, r)};
    }
};

namespace detail {

inline void mass_gram_schmidt(Eigen::MatrixXd& x, const SparseMatrix& m)
{
    for (int j = 0; j < x.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd mx = m * x.col(j);
            for (int i = 0; i < j; ++i) {
                x.col(j) -= x.col(i).dot(mx) * x.col(i);
            }
        }
        const double nrm = std::sqrt(x.col(j).dot(m * x.col(j)));
        if (!(nrm > 0)) {
            throw ConvergenceFailure("Gram-Schmidt produced a zero vector", 1.0);
        }
        x.col(j) /= nrm;
    }
}

inline void normalize_sign(Eigen::Ref<Eigen::VectorXd> v)
{
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) {
        v = -v;
    }
}

inline double residual_of(const SparseMatrix& k, const SparseMatrix& m, const Eigen::VectorXd& x, double lambda)
{
    const Eigen::VectorXd mx = m * x;
    return (k * x - lambda * mx).norm() / (mx.norm() * std::max(1.0, lambda));
}

inline void finalize(DiscreteEigenSystem& sys, const SparseMatrix& k, const SparseMatrix& m)
{
    mass_gram_schmidt(sys.vectors, m);
    const int count = static_cast<int>(sys.vectors.cols());
    sys.residuals.resize(count);
    for (int i = 0; i < count; ++i) {
        normalize_sign(sys.vectors.col(i));
        const Eigen::VectorXd x = sys.vectors.col(i);
        sys.values(i) = x.dot(k * x);
        sys.residuals(i) = residual_of(k, m, x, sys.values(i));
    }
    const Eigen::MatrixXd gram = sys.vectors.transpose() * (m * sys.vectors);
    sys.gram_error = (gram - Eigen::MatrixXd::Identity(count, count)).norm();
    sys.radii = Eigen::VectorXd::Zero(count);
}

inline DiscreteEigenSystem dense_solve(const SparseMatrix& k, const SparseMatrix& m, int count)
{
    const Eigen::MatrixXd kd(k);
    const Eigen::MatrixXd md(m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kd, md);
    if (es.info() != Eigen::Success) {
        throw ConvergenceFailure("dense generalized eigensolver failed", 1.0);
    }
    DiscreteEigenSystem sys;
    sys.values = es.eigenvalues().head(count);
    sys.vectors = es.eigenvectors().leftCols(count);
    return sys;
}

// Shift-invert block subspace iteration with Rayleigh-Ritz at every step.
inline DiscreteEigenSystem sparse_solve(const SparseMatrix& k, const SparseMatrix& m, int count,
                                        const EigenSolveOptions& opt)
{
    const int n = static_cast<int>(k.rows());
    const int block = std::min(n, std::max(2 * count, count + 6));
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(k);
    if (ldlt.info() != Eigen::Success) {
        throw ConvergenceFailure("sparse factorization of the stiffness matrix failed", 1.0);
    }
    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, block);
    for (int j = 0; j < block; ++j) {
        for (int i = 0; i < n; ++i) {
            x(i, j) = normal(rng);
        }
    }
    double worst = 1.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const Eigen::MatrixXd y = ldlt.solve(m * x);
        const Eigen::MatrixXd ky = k * y;
        const Eigen::MatrixXd my = m * y;
        Eigen::MatrixXd kr = y.transpose() * ky;
        Eigen::MatrixXd mr = y.transpose() * my;
        kr = 0.5 * (kr + kr.transpose()).eval();
        mr = 0.5 * (mr + mr.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(kr, mr);
        if (rr.info() != Eigen::Success) {
            throw ConvergenceFailure("Rayleigh-Ritz step failed", worst);
        }
        x = y * rr.eigenvectors();
        const Eigen::MatrixXd kx = ky * rr.eigenvectors();
        const Eigen::MatrixXd mx = my * rr.eigenvectors();
        worst = 0.0;
        for (int i = 0; i < count; ++i) {
            const double lam = rr.eigenvalues()(i);
            const double res = (kx.col(i) - lam * mx.col(i)).norm() / (mx.col(i).norm() * std::max(1.0, lam));
            worst = std::max(worst, res);
        }
        if (worst <= opt.tol) {
            DiscreteEigenSystem sys;
            sys.values = rr.eigenvalues().head(count);
            sys.vectors = x.leftCols(count);
            return sys;
        }
    }
    throw ConvergenceFailure("subspace iteration did not converge", worst);
}

} // namespace detail

inline DiscreteEigenSystem smallest_eigenpairs(const SparseMatrix& k, const SparseMatrix& m, int count,
                                               const EigenSolveOptions& opt = {})
{
    if (k.rows() != k.cols() || m.rows() != m.cols() || k.rows() != m.rows()) {
        throw DimensionMismatch("smallest_eigenpairs: K and M must be square and of equal size");
    }
    if (count < 1 || count > k.rows()) {
        throw InvalidArgument("smallest_eigenpairs: need 1 <= k <= dimension");
    }
    DiscreteEigenSystem sys = k.rows() < opt.dense_threshold ? detail::dense_solve(k, m, count)
                                                             : detail::sparse_solve(k, m, count, opt);
    detail::finalize(sys, k, m);
    for (int i = 0; i < count; ++i) {
        if (!(sys.residuals(i) <= opt.tol)) {
            throw ConvergenceFailure("eigenpair residual above tolerance", sys.residuals(i));
        }
    }
    return sys;
}

/// Lower bound of the smallest eigenvalue of the assembled mass matrix.
/// Element mass matrices dominate (area/12) I for CG and equal (area/3) I for CR.
inline double mass_spectrum_lower_bound(const FemSpace& space)
{
    const Mesh& mesh = space.mesh();
    double amin = std::numeric_limits<double>::infinity();
    for (int e = 0; e < static_cast<int>(mesh.elements().size()); ++e) {
        amin = std::min(amin, mesh.element_area(e));
    }
    const double c = space.kind() == SpaceKind::CG ? 12.0 : 3.0;
    return rounding::prev(rounding::div_down(amin, c) * (1.0 - 1e-12));
}

/// Residual inflation: radius_i = c ||K x_i - lambda_i M x_i||_{M^{-1}}, with the
/// dual norm bounded through the smallest mass eigenvalue.
inline void inflate(DiscreteEigenSystem& sys, const SparseMatrix& k, const SparseMatrix& m, double mass_min,
                    double safety = 10.0)
{
    if (!(mass_min > 0)) {
        throw InvalidArgument("inflate: mass lower bound must be positive");
    }
    sys.radii.resize(sys.size());
    const double inv_sqrt = 1.0 / rounding::sqrt_down(mass_min);
    for (int i = 0; i < sys.size(); ++i) {
        const Eigen::VectorXd x = sys.vectors.col(i);
        const double lam = sys.values(i);
        const double r = (k * x - lam * (m * x)).norm();
        const double floor = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lam);
        sys.radii(i) = rounding::next(safety * r * inv_sqrt * (1.0 + 1e-12) + floor);
    }
}

/// Enclosures of the two eigenvalues of every symmetric point matrix in A.
inline std::pair<Interval, Interval> sym2_interval_eig(const IntervalSymMatrix& a)
{
    const auto [centre, spread] = sym2_spectrum(a);
    return {centre - spread, centre + spread};
}

/// Inside a degenerate discrete cluster of a reflection-symmetric problem,
/// rotate the basis so each vector is reflection-odd or -even (odd first).
/// Returns false and leaves the basis untouched when not applicable.
inline bool symmetry_adapt_cluster(DiscreteEigenSystem& sys, const SparseMatrix& m, const std::vector<int>& reflection,
                                   int first, int last, double rel_gap = 1e-8)
{
    if (last - first != 1 || first < 0 || last >= sys.size()) {
        return false;
    }
    const double l0 = sys.values(first);
    const double l1 = sys.values(last);
    if (std::abs(l1 - l0) > rel_gap * std::abs(l1)) {
        return false;
    }
    auto reflect = [&reflection](const Eigen::VectorXd& v) {
        Eigen::VectorXd out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out(reflection[static_cast<std::size_t>(i)]) = v(i);
        }
        return out;
    };
    const Eigen::MatrixXd x = sys.vectors.middleCols(first, 2);
    Eigen::MatrixXd rx(x.rows(), 2);
    rx.col(0) = reflect(x.col(0));
    rx.col(1) = reflect(x.col(1));
    Eigen::Matrix2d r = x.transpose() * (m * rx);
    r = 0.5 * (r + r.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(r);
    if (es.info() != Eigen::Success || !(es.eigenvalues()(0) < 0 && es.eigenvalues()(1) > 0)) {
        return false;
    }
    Eigen::MatrixXd rotated = x * es.eigenvectors();
    for (int j = 0; j < 2; ++j) {
        detail::normalize_sign(rotated.col(j));
    }
    sys.vectors.middleCols(first, 2) = rotated;
    return true;
}

} // namespace eigshape
