#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "eigensolve.hpp"
#include "errors.hpp"
#include "fem.hpp"
#include "geometry.hpp"
#include "interval.hpp"
#include "subspace_error.hpp"
#include "verified_bounds.hpp"

namespace eigshape {

/// (F_P(u_i, u_j)) for the columns of `basis`.
inline IntervalSymMatrix derivative_matrix(const IntervalSymMatrix& p, const FemSystem& sys,
                                           const Eigen::MatrixXd& basis)
{
    const int k = static_cast<int>(basis.cols());
    if (k < 1) {
        throw InvalidArgument("derivative_matrix: empty basis");
    }
    IntervalSymMatrix m(k);
    for (int i = 0; i < k; ++i) {
        if (!(basis.col(i).norm() > 0)) {
            throw InvalidArgument("derivative_matrix: zero basis vector");
        }
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            m(i, j) = f_p_form(p, sys, basis.col(i), basis.col(j));
        }
    }
    return m;
}

inline IntervalSymMatrix derivative_matrix(const Direction& e, const ShapeParam& p, const Interval& t,
                                           const FemSystem& sys, const Eigen::MatrixXd& basis)
{
    return derivative_matrix(perturbation_matrix(e, p, t), sys, basis);
}

/// P^e as an enclosure; general directions use the point limit.
inline IntervalSymMatrix limit_matrix(const Direction& e, const ShapeParam& p)
{
    if (e.kind() == Direction::Kind::general) {
        return to_interval(limit_perturbation(e, p));
    }
    return perturbation_matrix(e, p, Interval(0.0));
}

struct MatrixErrorRadii {
    Interval err_m;
    Interval err_n;
};

/// Err(M*, M^*) = s sqrt(lambda_hat_N) ||P||_2 (bar_delta_a + 2 Err*_a), Err(N*, I) = s bar_delta_b.
inline MatrixErrorRadii matrix_error_radii(int cluster_size, const Interval& lambda_hat_N, const Interval& p_norm,
                                           const Interval& bar_da, const Interval& bar_db, const Interval& err_star_a)
{
    if (cluster_size < 1) {
        throw InvalidArgument("matrix_error_radii: cluster size must be positive");
    }
    for (const Interval* x : {&lambda_hat_N, &p_norm, &bar_da, &bar_db, &err_star_a}) {
        if (x->lo() < 0) {
            throw InvalidArgument("matrix_error_radii: inputs must be non-negative");
        }
    }
    const Interval s(static_cast<double>(cluster_size));
    const Interval em = s * sqrt(lambda_hat_N) * p_norm * (bar_da + Interval(2.0) * err_star_a);
    const Interval en = s * bar_db;
    return {Interval(0.0, em.hi()), Interval(0.0, en.hi())};
}

/// eta = Err(M*, M^*) + ||M^_t||_2 ||I - N*^{-1}||_2 with the Neumann bound
/// ||I - N*^{-1}||_2 <= e / (1 - e), e = Err(N*, I).
inline Interval eta_bound(const Interval& err_m, const IntervalSymMatrix& m_hat, const Interval& err_n)
{
    if (!(err_n.hi() < 1.0)) {
        throw SingularEnclosure("eta_bound: Err(N*, I) must be below 1");
    }
    const Interval e(0.0, err_n.hi());
    const Interval neumann = e / (Interval(1.0) - e);
    const Interval eta = Interval(err_m.hi()) + Interval(spectral_upper(m_hat)) * neumann;
    return {0.0, eta.hi()};
}

/// Enclosures of the eigenvalues (ascending) of every point matrix in m (size 1 or 2).
inline std::vector<Interval> small_eigen_enclosures(const IntervalSymMatrix& m)
{
    if (m.size() == 1) {
        return {m(0, 0)};
    }
    if (m.size() == 2) {
        const auto [a, b] = sym2_interval_eig(m);
        return {a, b};
    }
    throw InvalidArgument("eigenvalue enclosure implemented for clusters of size 1 and 2");
}

struct DerivativeMatrix {
    IntervalSymMatrix m_hat;
    Interval p_norm;
    Interval err_m;
    Interval err_n;
    Interval eta;
    Interval rotation_radius;
};

struct DerivativeEnclosure {
    Direction direction = Direction::radial();
    double epsilon = 0.0;
    Cluster cluster;
    std::vector<Interval> mu_hat;
    std::vector<Interval> quotient_range;
};

struct PipelineOptions {
    EigenSolveOptions solver;
    /// Rotate a degenerate discrete cluster into reflection-odd/even vectors.
    bool symmetry_adapt = true;
};

/// Everything produced by the difference-quotient pipeline.
struct QuotientReport {
    ShapeParam p = ShapeParam::regular();
    ShapeParam endpoint = ShapeParam::regular();
    int mesh_n = 0;
    double h = 0.0;
    EigenBounds endpoint_bounds;
    EigenBounds segment_bounds;
    std::vector<Interval> discrete_cg;
    bool symmetry_adapted = false;
    SubspaceErrorBounds subspace;
    Interval lambda_hat_top;
    DerivativeMatrix matrix;
    DerivativeEnclosure enclosure;
    bool linear_independence = false;
    /// lambda_N < lambda_{N+1} (and lambda_{n-1} < lambda_n) on the whole segment.
    bool cluster_isolated = false;
    /// Quotient ranges of consecutive indices are disjoint.
    bool separation_certified = false;
    /// Set when a hypothesis of the error chain could not be verified; the
    /// ranges are then the whole real line.
    std::string failure;
};

namespace detail {

struct BasisAtP {
    Discretization cg;
    bool adapted = false;
    Interval lambda_hat_top;
    Eigen::MatrixXd basis;
    std::vector<Interval> discrete;
};

inline BasisAtP cluster_basis(const ShapeParam& p, int n, const Cluster& c, const PipelineOptions& opt)
{
    BasisAtP b;
    b.cg = discretize(p, n, SpaceKind::CG, c.last + 1, opt.solver);
    if (opt.symmetry_adapt) {
        if (const auto refl = b.cg.space->dof_reflection()) {
            b.adapted = symmetry_adapt_cluster(b.cg.eig, b.cg.system.mass, *refl, c.first - 1, c.last - 1);
        }
    }
    b.basis = b.cg.eig.vectors.middleCols(c.first - 1, c.size());
    std::optional<Interval> top;
    for (int i = 0; i < c.size(); ++i) {
        const Eigen::VectorXd u = b.basis.col(i);
        const Interval rq = detail::bilinear_enclosure(b.cg.system.stiffness, u, u) /
                            detail::bilinear_enclosure(b.cg.system.mass, u, u);
        top = top ? max(*top, rq) : rq;
    }
    b.lambda_hat_top = *top;
    for (int i = 0; i < b.cg.eig.size(); ++i) {
        b.discrete.push_back(b.cg.eig.enclosure(i));
    }
    return b;
}

/// Runs `f`; hypotheses of the error chain that fail to verify are returned as a message.
template <class F>
std::string unless_unverified(F&& f)
{
    try {
        f();
    } catch (const GapTooSmall& e) {
        return e.what();
    } catch (const DeltaTooLarge& e) {
        return e.what();
    } catch (const InvalidDeltaB& e) {
        return e.what();
    } catch (const LinearDependence& e) {
        return e.what();
    } catch (const SingularEnclosure& e) {
        return e.what();
    }
    return {};
}

inline void check_cluster(const Cluster& c)
{
    c.validate();
    if (c.size() > 2) {
        throw InvalidArgument("the orthonormal-system correction is available for clusters of size 1 and 2");
    }
}

} // namespace detail

/// Guaranteed ranges of (lambda_i(p + t e) - lambda_i(p)) / t over t in (0, eps].
inline QuotientReport quotient_ranges(const ShapeParam& p, const Direction& e, double eps, int n, const Cluster& c,
                                      const PipelineOptions& opt = {})
{
    detail::check_cluster(c);
    if (!(eps > 0)) {
        throw InvalidArgument("quotient_ranges: eps must be positive");
    }
    QuotientReport rep;
    rep.p = p;
    rep.mesh_n = n;

    SegmentBounds seg = segment_bounds(p, e, eps, n, c.last + 1, opt.solver);
    rep.endpoint = seg.endpoint;
    rep.endpoint_bounds = seg.at_endpoint.bounds;
    rep.segment_bounds = seg.segment;
    rep.cluster_isolated = seg.segment.upper(c.last) < seg.segment.lower(c.last + 1) &&
                           (c.first == 1 || seg.segment.upper(c.first - 1) < seg.segment.lower(c.first));

    detail::BasisAtP b = detail::cluster_basis(p, n, c, opt);
    rep.h = b.cg.mesh->h();
    rep.discrete_cg = b.discrete;
    rep.symmetry_adapted = b.adapted;
    rep.lambda_hat_top = b.lambda_hat_top;

    const Interval t(0.0, eps);
    const IntervalSymMatrix pt = perturbation_matrix(e, p, t);
    rep.matrix.m_hat = derivative_matrix(pt, b.cg.system, b.basis);
    rep.matrix.p_norm = Interval(0.0, spectral_upper(pt));

    const ProjectionConstants pc = projection_constants(rep.h);
    rep.failure = detail::unless_unverified([&] {
        rep.subspace = subspace_error_bounds(c, seg.segment, b.discrete, b.lambda_hat_top, pc.c_cg);
        const MatrixErrorRadii radii = matrix_error_radii(c.size(), b.lambda_hat_top, rep.matrix.p_norm,
                                                          rep.subspace.bar_delta_a, rep.subspace.bar_delta_b,
                                                          rep.subspace.err_star_a);
        rep.matrix.err_m = radii.err_m;
        rep.matrix.err_n = radii.err_n;
        rep.linear_independence = linear_independence_check(rep.subspace.bar_delta_b, c.size());
        if (!rep.linear_independence) {
            throw LinearDependence("2 (N - n + 1) bar_delta_b < 1 could not be verified");
        }
        rep.matrix.eta = eta_bound(radii.err_m, rep.matrix.m_hat, radii.err_n);
    });
    if (!rep.failure.empty()) {
        rep.matrix.eta = Interval(0.0, rounding::kInf);
    }
    rep.matrix.rotation_radius = Interval(0.0);

    rep.enclosure.direction = e;
    rep.enclosure.epsilon = eps;
    rep.enclosure.cluster = c;
    rep.enclosure.mu_hat = small_eigen_enclosures(rep.matrix.m_hat);
    const double eta = rep.matrix.eta.hi();
    for (const Interval& mu : rep.enclosure.mu_hat) {
        rep.enclosure.quotient_range.emplace_back(rounding::sub_down(mu.lo(), eta), rounding::add_up(mu.hi(), eta));
    }
    rep.separation_certified = rep.failure.empty();
    for (std::size_t i = 1; i < rep.enclosure.quotient_range.size(); ++i) {
        rep.separation_certified = rep.separation_certified &&
                                   rep.enclosure.quotient_range[i - 1].certainly_less(rep.enclosure.quotient_range[i]);
    }
    return rep;
}

/// M^ = (F_{P^e}(u_i, u_j)) at p with the rotation-uncertainty radius
/// 2 (N - n + 1) sqrt(lambda_hat_N) ||P^e||_2 Err*_a.
struct DerivativeRangeReport {
    ShapeParam p = ShapeParam::regular();
    int mesh_n = 0;
    double h = 0.0;
    EigenBounds bounds;
    bool symmetry_adapted = false;
    SubspaceErrorBounds subspace;
    Interval lambda_hat_top;
    DerivativeMatrix matrix;
    /// Eigenvalues of M^ widened by the rotation radius: every possible
    /// directional derivative lambda_i lies in value_range[i].
    std::vector<Interval> value_range;
    Eigen::MatrixXd basis;
    std::string failure;
};

inline DerivativeRangeReport derivative_range_near_multiple(const ShapeParam& p, const Direction& e, int n,
                                                            const Cluster& c, const PipelineOptions& opt = {})
{
    detail::check_cluster(c);
    DerivativeRangeReport rep;
    rep.p = p;
    rep.mesh_n = n;
    BoundsComputation bc = compute_bounds(p, n, c.last + 1, opt.solver);
    rep.bounds = bc.bounds;

    detail::BasisAtP b = detail::cluster_basis(p, n, c, opt);
    rep.h = b.cg.mesh->h();
    rep.symmetry_adapted = b.adapted;
    rep.lambda_hat_top = b.lambda_hat_top;
    rep.basis = b.basis;

    const IntervalSymMatrix pe = limit_matrix(e, p);
    rep.matrix.m_hat = derivative_matrix(pe, b.cg.system, b.basis);
    rep.matrix.p_norm = Interval(0.0, spectral_upper(pe));

    const ProjectionConstants pc = projection_constants(rep.h);
    Interval radius(0.0, rounding::kInf);
    rep.failure = detail::unless_unverified([&] {
        rep.subspace = subspace_error_bounds(c, rep.bounds, b.discrete, b.lambda_hat_top, pc.c_cg);
        radius = Interval(2.0 * c.size()) * sqrt(b.lambda_hat_top) * rep.matrix.p_norm * rep.subspace.err_star_a;
    });
    rep.matrix.rotation_radius = Interval(0.0, radius.hi());
    rep.matrix.err_m = Interval(0.0);
    rep.matrix.err_n = Interval(0.0);
    rep.matrix.eta = Interval(0.0);
    for (const Interval& mu : small_eigen_enclosures(rep.matrix.m_hat)) {
        rep.value_range.emplace_back(rounding::sub_down(mu.lo(), radius.hi()), rounding::add_up(mu.hi(), radius.hi()));
    }
    return rep;
}

/// F_P(u, u) for a single mass-normalized coefficient vector.
inline Interval simple_derivative(const IntervalSymMatrix& p_limit, const FemSystem& sys, const Eigen::VectorXd& u)
{
    return f_p_form(p_limit, sys, u, u);
}

struct SimpleDerivativeReport {
    int index = 1;
    Interval value;  ///< F_{P^e}(u_h, u_h)
    Interval eta;    ///< 1x1 error bound
    Interval range;  ///< value widened by eta
    EigenBounds bounds;
};

/// Directional derivative of a certified-simple eigenvalue lambda_i at p.
inline SimpleDerivativeReport simple_derivative(const ShapeParam& p, const Direction& e, int n, int index,
                                                const PipelineOptions& opt = {})
{
    if (index < 1) {
        throw InvalidArgument("simple_derivative: index must be positive");
    }
    SimpleDerivativeReport rep;
    rep.index = index;
    BoundsComputation bc = compute_bounds(p, n, index + 1, opt.solver);
    rep.bounds = bc.bounds;
    const bool below = index == 1 || bc.bounds.upper(index - 1) < bc.bounds.lower(index);
    const bool above = bc.bounds.upper(index) < bc.bounds.lower(index + 1);
    if (!below || !above) {
        throw NotCertifiedSimple("eigenvalue bounds overlap a neighbour; simplicity not certified");
    }
    const Cluster c{index, index};
    const Eigen::VectorXd u = bc.cg.eig.vectors.col(index - 1);
    const IntervalSymMatrix pe = limit_matrix(e, p);
    rep.value = simple_derivative(pe, bc.cg.system, u);

    std::vector<Interval> discrete;
    for (int i = 0; i < bc.cg.eig.size(); ++i) {
        discrete.push_back(bc.cg.eig.enclosure(i));
    }
    const Interval lh = bc.cg.eig.enclosure(index - 1);
    const SubspaceErrorBounds s =
        subspace_error_bounds(c, bc.bounds, discrete, lh, projection_constants(bc.h).c_cg);
    IntervalSymMatrix one(1);
    one(0, 0) = rep.value;
    const MatrixErrorRadii radii = matrix_error_radii(1, lh, Interval(0.0, spectral_upper(pe)),
                                                      s.bar_delta_a, s.bar_delta_b, s.err_star_a);
    rep.eta = eta_bound(radii.err_m, one, radii.err_n);
    rep.range = {rounding::sub_down(rep.value.lo(), rep.eta.hi()), rounding::add_up(rep.value.hi(), rep.eta.hi())};
    return rep;
}

} // namespace eigshape
