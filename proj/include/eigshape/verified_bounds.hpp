#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eigensolve.hpp"
#include "errors.hpp"
#include "fem.hpp"
#include "geometry.hpp"
#include "interval.hpp"
#include "mesh.hpp"

namespace eigshape {

struct ProjectionConstants {
    Interval c_cg;
    Interval c_cr;
};

/// C_h^CG <= 0.493 h and C_h^CR <= 0.1893 h, as [0, upper] enclosures.
inline ProjectionConstants projection_constants(double h)
{
    if (!(h > 0)) {
        throw InvalidArgument("projection_constants: h must be positive");
    }
    const double cg = rounding::mul_up(Interval::enclose(0.493).hi(), h);
    const double cr = rounding::mul_up(Interval::enclose(0.1893).hi(), h);
    return {Interval(0.0, cg), Interval(0.0, cr)};
}

enum class BoundProvenance { direct, transported, intersected };

inline std::string to_string(BoundProvenance p)
{
    switch (p) {
    case BoundProvenance::direct: return "direct";
    case BoundProvenance::transported: return "transported";
    default: return "intersected";
    }
}

/// Two-sided bounds lambda_k in [lower, upper], k = 1..k_max.
class EigenBounds {
public:
    EigenBounds() = default;
    EigenBounds(std::vector<Interval> b, BoundProvenance prov) : bounds_(std::move(b)), provenance_(prov)
    {
        for (const Interval& x : bounds_) {
            if (!(x.lo() > 0)) {
                throw InvalidArgument("EigenBounds: lower bounds must be positive");
            }
        }
    }

    int k_max() const { return static_cast<int>(bounds_.size()); }
    /// Bound for lambda_k, 1-based.
    const Interval& operator[](int k) const
    {
        if (k < 1 || k > k_max()) {
            throw InvalidArgument("EigenBounds: index out of range");
        }
        return bounds_[static_cast<std::size_t>(k - 1)];
    }
    double lower(int k) const { return (*this)[k].lo(); }
    double upper(int k) const { return (*this)[k].hi(); }
    BoundProvenance provenance() const { return provenance_; }
    const std::vector<Interval>& all() const { return bounds_; }

private:
    std::vector<Interval> bounds_;
    BoundProvenance provenance_ = BoundProvenance::direct;
};

/// Mesh, space, assembled system and computed eigenpairs for one shape.
struct Discretization {
    std::unique_ptr<Mesh> mesh;
    std::unique_ptr<FemSpace> space;
    FemSystem system;
    DiscreteEigenSystem eig;
};

inline Discretization discretize(const ShapeParam& p, int n, SpaceKind kind, int count,
                                 const EigenSolveOptions& opt = {})
{
    Discretization d;
    d.mesh = std::make_unique<Mesh>(triangle_of(p), n);
    d.space = std::make_unique<FemSpace>(*d.mesh, kind);
    if (count > d.space->n_dofs()) {
        throw InvalidArgument("requested more eigenvalues than the discrete space has");
    }
    d.system = assemble(*d.space);
    d.eig = smallest_eigenpairs(d.system.stiffness, d.system.mass, count, opt);
    inflate(d.eig, d.system.stiffness, d.system.mass, mass_spectrum_lower_bound(*d.space));
    return d;
}

/// Lower bounds from CR eigenvalues and upper bounds from CG eigenvalues.
inline EigenBounds bounds_from(const DiscreteEigenSystem& cg, const DiscreteEigenSystem& cr, double h)
{
    if (cg.size() != cr.size()) {
        throw DimensionMismatch("bounds_from: CG and CR systems must have the same length");
    }
    const ProjectionConstants c = projection_constants(h);
    const Interval c2 = sqr(c.c_cr);
    std::vector<Interval> out;
    for (int i = 0; i < cg.size(); ++i) {
        // lambda / (1 + C^2 lambda) written with a single occurrence of lambda.
        const Interval lcr = cr.enclosure(i);
        if (!(lcr.lo() > 0)) {
            throw ConvergenceFailure("non-positive CR eigenvalue enclosure", cr.residuals(i));
        }
        const Interval low = Interval(1.0) / (Interval(1.0) / lcr + c2);
        const double up = cg.enclosure(i).hi();
        if (!(low.lo() <= up)) {
            throw ConvergenceFailure("lower bound exceeds upper bound; discrete solve inconsistent", cr.residuals(i));
        }
        out.emplace_back(low.lo(), up);
    }
    return {std::move(out), BoundProvenance::direct};
}

struct BoundsComputation {
    EigenBounds bounds;
    Discretization cg;
    Discretization cr;
    double h = 0.0;
};

inline BoundsComputation compute_bounds(const ShapeParam& p, int n, int k_max, const EigenSolveOptions& opt = {})
{
    if (n < 1 || k_max < 1) {
        throw InvalidArgument("compute_bounds: N and k_max must be positive");
    }
    BoundsComputation b;
    b.cg = discretize(p, n, SpaceKind::CG, k_max, opt);
    b.cr = discretize(p, n, SpaceKind::CR, k_max, opt);
    b.h = b.cg.mesh->h();
    b.bounds = bounds_from(b.cg.eig, b.cr.eig, b.h);
    return b;
}

inline EigenBounds eigenvalue_bounds(const ShapeParam& p, int n, int k_max, const EigenSolveOptions& opt = {})
{
    return compute_bounds(p, n, k_max, opt).bounds;
}

/// Bounds at p from bounds at q and S = S_{p,q}:
/// lambda_min(S S^T) lambda(q) <= lambda(p) <= lambda_max(S S^T) lambda(q).
inline EigenBounds transport_bounds(const EigenBounds& at_q, const IntervalAffineMap& s)
{
    const auto [lmin, lmax] = qq_spectrum(s);
    std::vector<Interval> out;
    for (int k = 1; k <= at_q.k_max(); ++k) {
        const double lo = rounding::mul_down(lmin.lo(), at_q.lower(k));
        const double hi = rounding::mul_up(lmax.hi(), at_q.upper(k));
        out.emplace_back(lo, hi);
    }
    return {std::move(out), BoundProvenance::transported};
}

inline EigenBounds transport_bounds(const EigenBounds& at_q, const AffineMap& s)
{
    return transport_bounds(at_q, IntervalAffineMap{Interval(s.alpha), Interval(s.beta)});
}

inline EigenBounds intersect(const EigenBounds& a, const EigenBounds& b)
{
    if (a.k_max() != b.k_max()) {
        throw DimensionMismatch("intersect: different k_max");
    }
    std::vector<Interval> out;
    for (int k = 1; k <= a.k_max(); ++k) {
        out.push_back(a[k].intersect(b[k]));
    }
    return {std::move(out), BoundProvenance::intersected};
}

struct SegmentBounds {
    ShapeParam endpoint;
    BoundsComputation at_endpoint;
    /// Valid for every p + t e with t in [0, eps].
    EigenBounds segment;
};

/// Bounds at p_eps = p + eps e transported to the whole segment t in [0, eps].
inline SegmentBounds segment_bounds(const ShapeParam& p, const Direction& e, double eps, int n, int k_max,
                                    const EigenSolveOptions& opt = {})
{
    if (!(eps > 0)) {
        throw InvalidArgument("segment_bounds: eps must be positive");
    }
    const ShapeEnclosure along = shifted(p, e, Interval(0.0, eps));
    const ShapeParam pe = shifted(p, e, eps);
    BoundsComputation at = compute_bounds(pe, n, k_max, opt);
    const IntervalAffineMap s = transform_between(along, enclosure_of(pe));
    EigenBounds seg = transport_bounds(at.bounds, s);
    return {pe, std::move(at), std::move(seg)};
}

} // namespace eigshape
