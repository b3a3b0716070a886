#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "eigensolve.hpp"
#include "errors.hpp"
#include "interval.hpp"
#include "verified_bounds.hpp"

namespace eigshape {

/// Consecutive eigenvalue indices n..N (1-based) treated together.
struct Cluster {
    int first = 2;
    int last = 3;

    int size() const { return last - first + 1; }
    void validate() const
    {
        if (first < 1 || last < first) {
            throw InvalidArgument("cluster indices must satisfy 1 <= n <= N");
        }
    }
};

struct ProjectionDeltaB {
    Interval delta_b;
    Interval tau;
    Interval tau_h;
    Interval xi;
    Interval beta;
};

namespace detail {

struct TauPair {
    Interval tau;
    Interval tau_h;
};

// tau, tau_h restricted to the neighbouring discrete eigenvalues n-1 and N+1,
// which attain the maxima once the ordering relative to the cluster is certified.
inline TauPair tau_values(const Cluster& c, const EigenBounds& exact, const std::vector<Interval>& discrete)
{
    if (static_cast<int>(discrete.size()) < c.last + 1) {
        throw InvalidArgument("projection bound needs the discrete eigenvalue N+1");
    }
    double tau = 0.0;
    double tau_h = 0.0;
    for (int j = c.first; j <= c.last; ++j) {
        const Interval lj = exact[j];
        std::vector<int> neighbours{c.last + 1};
        if (c.first > 1) {
            neighbours.push_back(c.first - 1);
        }
        for (int i : neighbours) {
            const Interval li = discrete[static_cast<std::size_t>(i - 1)];
            const bool above = i > c.last;
            if (above ? !(li.lo() > lj.hi()) : !(li.hi() < lj.lo())) {
                throw GapTooSmall("cluster is not separated from the neighbouring discrete eigenvalues");
            }
            const Interval gap = above ? li - lj : lj - li;
            tau = std::max(tau, (lj / gap).hi());
            tau_h = std::max(tau_h, (li / gap).hi());
        }
    }
    return {Interval(0.0, tau), Interval(0.0, tau_h)};
}

inline Interval one_minus_inv_sqrt(int size)
{
    return Interval(1.0) - Interval(1.0) / sqrt(Interval(static_cast<double>(size)));
}

} // namespace detail

/// delta_b <= (1 + beta) lambda_N C_h^2 with beta = tau / (1 - tau_h xi).
///
/// xi starts as the beta = 0 value lambda_N C^2 and is replaced once by the
/// resulting delta_b; the applicability condition tau_h xi < 1 - |J|^{-1/2}
/// is checked for the final xi.
inline ProjectionDeltaB delta_b_projection(const Cluster& c, const EigenBounds& exact,
                                           const std::vector<Interval>& discrete, const Interval& c_cg)
{
    c.validate();
    if (exact.k_max() < c.last + 1) {
        throw InvalidArgument("projection bound needs eigenvalue bounds up to N+1");
    }
    if (!(exact.upper(c.last) < exact.lower(c.last + 1))) {
        throw GapTooSmall("cluster upper bound does not separate from lambda_{N+1}");
    }
    const auto [tau, tau_h] = detail::tau_values(c, exact, discrete);
    const Interval base = Interval(exact.upper(c.last)) * sqr(Interval(c_cg.hi()));
    const Interval limit = detail::one_minus_inv_sqrt(c.size());
    auto pass = [&](const Interval& xi) {
        const Interval txi = Interval(tau_h.hi()) * Interval(xi.hi());
        if (!(txi.hi() < limit.lo())) {
            throw GapTooSmall("tau_h * xi < 1 - |J|^{-1/2} could not be verified");
        }
        const Interval beta = Interval(tau.hi()) / (Interval(1.0) - txi);
        return std::pair{Interval(0.0, ((Interval(1.0) + beta) * base).hi()), beta};
    };
    Interval xi(0.0, base.hi());
    auto [d1, b1] = pass(xi);
    xi = d1;
    auto [d2, b2] = pass(xi);
    return {d2, tau, tau_h, xi, Interval(0.0, b2.hi())};
}

/// Upper bound of max_{v in E, w in E'} (v, w) over unit vectors in the inner
/// product of `gram`, from coefficient blocks of the two spaces.
inline Interval non_orthogonality(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const SparseMatrix& gram)
{
    const Eigen::MatrixXd gx = x.transpose() * (gram * x);
    const Eigen::MatrixXd gy = y.transpose() * (gram * y);
    const Eigen::MatrixXd cxy = x.transpose() * (gram * y);
    // Rounding slack for the dense products.
    const double n = static_cast<double>(x.rows());
    const double mag = (x.cwiseAbs().transpose() * (gram.cwiseAbs() * y.cwiseAbs())).maxCoeff();
    const double slack = 2.0 * (n + 64.0) * std::numeric_limits<double>::epsilon() *
                         std::max({mag, (x.cwiseAbs().transpose() * (gram.cwiseAbs() * x.cwiseAbs())).maxCoeff(),
                                   (y.cwiseAbs().transpose() * (gram.cwiseAbs() * y.cwiseAbs())).maxCoeff()});
    auto gersh = [slack](const Eigen::MatrixXd& g) {
        double low = std::numeric_limits<double>::infinity();
        for (int i = 0; i < g.rows(); ++i) {
            double off = 0.0;
            for (int j = 0; j < g.cols(); ++j) {
                off += i == j ? 0.0 : std::abs(g(i, j)) + slack;
            }
            low = std::min(low, g(i, i) - slack - off);
        }
        return low;
    };
    const double lx = gersh(gx);
    const double ly = gersh(gy);
    if (!(lx > 0 && ly > 0)) {
        throw SingularEnclosure("non_orthogonality: Gram matrix not certified positive definite");
    }
    const double num = rounding::add_up(cxy.norm() * (1.0 + 1e-12), slack * static_cast<double>(cxy.size()));
    return Interval(0.0, rounding::div_up(num, rounding::sqrt_down(rounding::mul_down(lx, ly))));
}

struct ClusterData {
    Cluster cluster;
    Interval lambda_first;   ///< exact lambda_n
    Interval lambda_hat_top; ///< top discrete Rayleigh quotient of the cluster
    Interval rho;            ///< lambda_n < rho <= lambda_{N+1}
};

struct RecursiveDeltas {
    Interval delta_a;
    Interval delta_b;
};

/// Cluster-by-cluster bounds; eps_a[k][l], eps_b[k][l] (l < k) are the
/// non-orthogonality measures between the discrete spaces of clusters l and k.
inline std::vector<RecursiveDeltas> delta_bounds_recursive(const std::vector<ClusterData>& clusters,
                                                           const std::vector<std::vector<Interval>>& eps_a,
                                                           const std::vector<std::vector<Interval>>& eps_b)
{
    std::vector<RecursiveDeltas> out;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        const ClusterData& ck = clusters[k];
        ck.cluster.validate();
        const Interval rho = ck.rho;
        const Interval gap = rho - ck.lambda_first;
        if (!(gap.lo() > 0)) {
            throw GapTooSmall("rho is not certified above lambda_n");
        }
        Interval theta_a(0.0);
        Interval theta_b(0.0);
        for (std::size_t l = 0; l < k; ++l) {
            const Interval ln = clusters[l].lambda_first;
            const Interval w = rho - ln;
            if (!(w.lo() > 0)) {
                throw GapTooSmall("rho below a preceding cluster");
            }
            const Interval ea = k < eps_a.size() && l < eps_a[k].size() ? eps_a[k][l] : Interval(0.0);
            const Interval eb = k < eps_b.size() && l < eps_b[k].size() ? eps_b[k][l] : Interval(0.0);
            theta_a += w / ln * sqr(ea + out[l].delta_a);
            theta_b += w * sqr(eb + out[l].delta_b);
        }
        const Interval lh = ck.lambda_hat_top;
        const Interval da2 = (rho * (lh - ck.lambda_first) + ck.lambda_first * lh * theta_a) / (lh * gap);
        const Interval db2 = (lh - ck.lambda_first + theta_b) / gap;
        out.push_back({Interval(0.0, sqrt_clamped(da2).hi()), Interval(0.0, sqrt_clamped(db2).hi())});
    }
    return out;
}

/// delta_a^2 <= 2 - 2 lambda_n sqrt((1 - delta_b^2) / (lambda_N lambda_hat_N)) and
/// bar_delta_a^2 <= lambda_N + lambda_hat_N - 2 lambda_n sqrt(1 - delta_b^2).
struct DeltaA {
    Interval delta_a;
    Interval bar_delta_a;
};

inline DeltaA delta_a_from_b(const Interval& lambda_n, const Interval& lambda_N, const Interval& lambda_hat_N,
                             const Interval& delta_b)
{
    if (!(delta_b.hi() < 1.0) || delta_b.lo() < 0) {
        throw InvalidDeltaB("delta_a_from_b requires 0 <= delta_b < 1");
    }
    const Interval s = sqrt(Interval(1.0) - sqr(delta_b));
    const Interval da2 = Interval(2.0) - Interval(2.0) * lambda_n * sqrt(sqr(s) / (lambda_N * lambda_hat_N));
    const Interval bda2 = lambda_N + lambda_hat_N - Interval(2.0) * lambda_n * s;
    return {Interval(0.0, sqrt_clamped(da2).hi()), Interval(0.0, sqrt_clamped(bda2).hi())};
}

/// bar_delta_b = sqrt(2 - 2 sqrt(1 - delta_b^2)), evaluated without cancellation.
inline Interval bar_delta_b(const Interval& delta_b)
{
    if (delta_b.hi() > 1.0 || delta_b.lo() < 0) {
        throw InvalidDeltaB("bar_delta_b requires 0 <= delta_b <= 1");
    }
    const Interval root = sqrt(nonnegative_part(Interval(1.0) - sqr(delta_b)));
    return delta_b * sqrt(Interval(2.0) / (Interval(1.0) + root));
}

struct OrthonormalCorrection {
    Interval err_star_a;
    Interval err_star_b;
};

/// Err*_b = 2 d (2 - d) / (1 - 2 d) and Err*_a = sqrt(lambda_3 Err*_b + lambda_3^h - lambda_2),
/// using the upper ends of lambda_3, lambda_3^h and the lower end of lambda_2.
/// When Err*_b exceeds 1 its square is used in place of Err*_b.
inline OrthonormalCorrection orthonormal_correction(const Interval& delta_b, const Interval& lambda2,
                                                    const Interval& lambda3, const Interval& lambda3_h)
{
    if (delta_b.lo() < 0) {
        throw InvalidDeltaB("orthonormal_correction: negative delta_b");
    }
    if (!(delta_b.hi() < 0.5)) {
        throw DeltaTooLarge("orthonormal_correction requires delta_b < 1/2");
    }
    const Interval num = Interval(2.0) * (Interval(1.0) - sqr(Interval(1.0) - delta_b));
    const Interval eb = num / (Interval(1.0) - Interval(2.0) * delta_b);
    const Interval e = max(eb, sqr(eb));
    const Interval ea2 = Interval(lambda3.hi()) * e + Interval(lambda3_h.hi()) - Interval(lambda2.lo());
    return {Interval(0.0, sqrt_clamped(ea2).hi()), eb};
}

/// 2 (N - n + 1) bar_delta_b < 1 certifies linear independence.
inline bool linear_independence_check(const Interval& bar_db, int cluster_size)
{
    if (cluster_size < 1) {
        throw InvalidArgument("cluster size must be positive");
    }
    return rounding::mul_up(2.0 * cluster_size, bar_db.hi()) < 1.0;
}

/// Every distance and amplification quantity for one cluster.
struct SubspaceErrorBounds {
    Interval delta_b;
    Interval delta_a;
    Interval bar_delta_a;
    Interval bar_delta_b;
    Interval err_star_a;
    Interval err_star_b;
    Interval tau;
    Interval tau_h;
    Interval xi;
    Interval beta_amp;
    /// False when delta_b comes from the first-cluster quotient bound instead.
    bool projection_bound = true;
};

/// Full chain for a cluster of discrete CG eigenpairs: projection delta_b,
/// then delta_a, bar deltas and the orthonormal-system corrections.
/// `lambda_hat_top` is the largest Rayleigh quotient in the discrete cluster.
inline SubspaceErrorBounds subspace_error_bounds(const Cluster& c, const EigenBounds& exact,
                                                 const std::vector<Interval>& discrete,
                                                 const Interval& lambda_hat_top, const Interval& c_cg)
{
    SubspaceErrorBounds s;
    if (c.size() == 1 && c.first == 1) {
        // 1 - |J|^{-1/2} vanishes; use delta_b^2 <= (lambda_hat - lambda_1) / (lambda_2 - lambda_1).
        if (exact.k_max() < 2) {
            throw InvalidArgument("first-cluster bound needs eigenvalue bounds up to 2");
        }
        const ClusterData d{c, exact[1], lambda_hat_top, Interval(exact.lower(2))};
        s.delta_b = delta_bounds_recursive({d}, {}, {})[0].delta_b;
        s.projection_bound = false;
    } else {
        const ProjectionDeltaB pb = delta_b_projection(c, exact, discrete, c_cg);
        s.delta_b = pb.delta_b;
        s.tau = pb.tau;
        s.tau_h = pb.tau_h;
        s.xi = pb.xi;
        s.beta_amp = pb.beta;
    }
    const DeltaA da = delta_a_from_b(exact[c.first], exact[c.last], lambda_hat_top, s.delta_b);
    s.delta_a = da.delta_a;
    s.bar_delta_a = da.bar_delta_a;
    s.bar_delta_b = bar_delta_b(s.delta_b);
    const OrthonormalCorrection oc = orthonormal_correction(s.delta_b, exact[c.first], exact[c.last], lambda_hat_top);
    s.err_star_a = oc.err_star_a;
    s.err_star_b = oc.err_star_b;
    return s;
}

} // namespace eigshape
