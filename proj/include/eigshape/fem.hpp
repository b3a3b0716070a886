#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/SparseExtra>

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "interval.hpp"
#include "mesh.hpp"

namespace eigshape {

enum class SpaceKind { CG, CR };

inline std::string to_string(SpaceKind k) { return k == SpaceKind::CG ? "CG" : "CR"; }

using SparseMatrix = Eigen::SparseMatrix<double>;

/// P1 conforming (CG, nodal) or Crouzeix-Raviart (CR, edge midpoint) space.
/// With `constrained` the Dirichlet condition is imposed by dropping boundary
/// nodes or boundary edges from the numbering.
class FemSpace {
public:
    FemSpace(const Mesh& mesh, SpaceKind kind, bool constrained = true) : mesh_(&mesh), kind_(kind)
    {
        const std::size_t entities = kind == SpaceKind::CG ? mesh.nodes().size() : mesh.edges().size();
        entity_to_dof_.assign(entities, -1);
        for (std::size_t k = 0; k < entities; ++k) {
            const bool boundary = kind == SpaceKind::CG ? mesh.boundary_nodes()[k] : mesh.edges()[k].boundary;
            if (!constrained || !boundary) {
                entity_to_dof_[k] = static_cast<int>(dof_to_entity_.size());
                dof_to_entity_.push_back(static_cast<int>(k));
            }
        }
    }

    const Mesh& mesh() const { return *mesh_; }
    SpaceKind kind() const { return kind_; }
    int n_dofs() const { return static_cast<int>(dof_to_entity_.size()); }
    /// Global dof of a node (CG) or edge (CR); -1 when constrained.
    int dof_of_entity(int k) const { return entity_to_dof_[static_cast<std::size_t>(k)]; }
    int entity_of_dof(int d) const { return dof_to_entity_[static_cast<std::size_t>(d)]; }

    /// Dofs of element e in local basis order.
    std::array<int, 3> element_dofs(int e) const
    {
        const auto& ent = kind_ == SpaceKind::CG ? mesh_->elements()[static_cast<std::size_t>(e)]
                                                 : mesh_->element_edges()[static_cast<std::size_t>(e)];
        return {dof_of_entity(ent[0]), dof_of_entity(ent[1]), dof_of_entity(ent[2])};
    }

    /// Dof permutation induced by the mesh reflection, if any.
    std::optional<std::vector<int>> dof_reflection() const
    {
        const auto emap = kind_ == SpaceKind::CG ? mesh_->node_reflection() : mesh_->edge_reflection();
        if (!emap) {
            return std::nullopt;
        }
        std::vector<int> map(dof_to_entity_.size());
        for (std::size_t d = 0; d < map.size(); ++d) {
            map[d] = dof_of_entity((*emap)[static_cast<std::size_t>(dof_to_entity_[d])]);
        }
        return map;
    }

private:
    const Mesh* mesh_;
    SpaceKind kind_;
    std::vector<int> entity_to_dof_;
    std::vector<int> dof_to_entity_;
};

/// Element matrices for one triangle, local basis order.
struct ElementMatrices {
    Eigen::Matrix3d stiffness;
    Eigen::Matrix3d mass;
    Eigen::Matrix3d dxx;
    Eigen::Matrix3d dxy; // (phi_i,x , phi_j,y)
    Eigen::Matrix3d dyy;
};

inline ElementMatrices element_matrices(SpaceKind kind, const Point2& p0, const Point2& p1, const Point2& p2)
{
    const double area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    if (!(area > 0)) {
        throw DegenerateShape("element with non-positive area");
    }
    const std::array<Point2, 3> p{p0, p1, p2};
    // grad of barycentric coordinate k.
    Eigen::Matrix<double, 3, 2> g;
    for (int k = 0; k < 3; ++k) {
        const Point2& a = p[static_cast<std::size_t>((k + 1) % 3)];
        const Point2& b = p[static_cast<std::size_t>((k + 2) % 3)];
        g(k, 0) = (a.y - b.y) / (2.0 * area);
        g(k, 1) = (b.x - a.x) / (2.0 * area);
    }
    ElementMatrices m;
    if (kind == SpaceKind::CR) {
        g *= -2.0; // psi_k = 1 - 2 lambda_k
        m.mass = (area / 3.0) * Eigen::Matrix3d::Identity();
    } else {
        m.mass = (area / 12.0) * (Eigen::Matrix3d::Ones() + Eigen::Matrix3d::Identity());
    }
    m.dxx = area * g.col(0) * g.col(0).transpose();
    m.dyy = area * g.col(1) * g.col(1).transpose();
    m.dxy = area * g.col(0) * g.col(1).transpose();
    m.stiffness = m.dxx + m.dyy;
    return m;
}

struct DerivativeCouplings {
    SparseMatrix dxx;
    SparseMatrix dxy; // not symmetric; entry (i, j) = (phi_i,x , phi_j,y)
    SparseMatrix dyy;
};

struct FemSystem {
    SparseMatrix stiffness;
    SparseMatrix mass;
    DerivativeCouplings d;
};

inline FemSystem assemble(const FemSpace& space)
{
    using Triplet = Eigen::Triplet<double>;
    const Mesh& mesh = space.mesh();
    std::vector<Triplet> tk, tm, txx, txy, tyy;
    const std::size_t cap = mesh.elements().size() * 9;
    for (auto* v : {&tk, &tm, &txx, &txy, &tyy}) {
        v->reserve(cap);
    }
    for (int e = 0; e < static_cast<int>(mesh.elements().size()); ++e) {
        const auto& el = mesh.elements()[static_cast<std::size_t>(e)];
        const auto em = element_matrices(space.kind(), mesh.nodes()[static_cast<std::size_t>(el[0])],
                                         mesh.nodes()[static_cast<std::size_t>(el[1])],
                                         mesh.nodes()[static_cast<std::size_t>(el[2])]);
        const auto dofs = space.element_dofs(e);
        for (int a = 0; a < 3; ++a) {
            const int i = dofs[static_cast<std::size_t>(a)];
            if (i < 0) {
                continue;
            }
            for (int b = 0; b < 3; ++b) {
                const int j = dofs[static_cast<std::size_t>(b)];
                if (j < 0) {
                    continue;
                }
                tk.emplace_back(i, j, em.stiffness(a, b));
                if (em.mass(a, b) != 0.0) {
                    tm.emplace_back(i, j, em.mass(a, b));
                }
                txx.emplace_back(i, j, em.dxx(a, b));
                txy.emplace_back(i, j, em.dxy(a, b));
                tyy.emplace_back(i, j, em.dyy(a, b));
            }
        }
    }
    const int n = space.n_dofs();
    auto build = [n](const std::vector<Triplet>& t) {
        SparseMatrix m(n, n);
        m.setFromTriplets(t.begin(), t.end());
        m.makeCompressed();
        return m;
    };
    return {build(tk), build(tm), {build(txx), build(txy), build(tyy)}};
}

inline void check_dims(const SparseMatrix& a, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    if (u.size() != a.rows() || v.size() != a.cols()) {
        throw DimensionMismatch("coefficient vector does not match the space dimension");
    }
}

inline double l2_inner(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    check_dims(sys.mass, u, v);
    return u.dot(sys.mass * v);
}

inline double energy_inner(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    check_dims(sys.stiffness, u, v);
    return u.dot(sys.stiffness * v);
}

/// (u_x, v_x), (u_x, v_y) + (v_x, u_y), (u_y, v_y) with a bound on their
/// floating-point evaluation error.
struct GradientProducts {
    Interval xx;
    Interval xy_sym;
    Interval yy;
};

namespace detail {

// |a^T B c| evaluated with a rigorous a priori rounding radius.
inline Interval bilinear_enclosure(const SparseMatrix& b, const Eigen::VectorXd& a, const Eigen::VectorXd& c)
{
    const double value = a.dot(b * c);
    const double magnitude = a.cwiseAbs().dot(b.cwiseAbs() * c.cwiseAbs());
    long row_max = 0;
    for (int k = 0; k < b.outerSize(); ++k) {
        row_max = std::max<long>(row_max, static_cast<long>(b.col(k).nonZeros()));
    }
    // Summation of row_max + n products plus assembly rounding of the entries.
    const double terms = static_cast<double>(row_max + a.size() + 64);
    const double gamma = 1.01 * terms * std::numeric_limits<double>::epsilon();
    const double rad = rounding::mul_up(gamma, magnitude);
    return {rounding::sub_down(value, rad), rounding::add_up(value, rad)};
}

} // namespace detail

inline GradientProducts gradient_products(const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    check_dims(sys.stiffness, u, v);
    return {detail::bilinear_enclosure(sys.d.dxx, u, v),
            detail::bilinear_enclosure(sys.d.dxy, u, v) + detail::bilinear_enclosure(sys.d.dxy, v, u),
            detail::bilinear_enclosure(sys.d.dyy, u, v)};
}

/// F_P(u, v) = (P grad u, grad v) in floating point.
inline double f_p_form(const SymMatrix2& p, const FemSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    check_dims(sys.stiffness, u, v);
    return p.a11 * u.dot(sys.d.dxx * v) + p.a12 * (u.dot(sys.d.dxy * v) + v.dot(sys.d.dxy * u)) +
           p.a22 * u.dot(sys.d.dyy * v);
}

/// Enclosure of F_P(u, v) for every P in the interval matrix.
inline Interval f_p_form(const IntervalSymMatrix& p, const FemSystem& sys, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v)
{
    if (p.size() != 2) {
        throw DimensionMismatch("f_p_form: P must be 2x2");
    }
    const GradientProducts g = gradient_products(sys, u, v);
    return p(0, 0) * g.xx + p(0, 1) * g.xy_sym + p(1, 1) * g.yy;
}

inline void write_matrix_market(const SparseMatrix& m, const std::string& path)
{
    if (!Eigen::saveMarket(m, path)) {
        throw InvalidArgument("could not write " + path);
    }
}

} // namespace eigshape
