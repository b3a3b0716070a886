#include <gtest/gtest.h>

#include <unsupported/Eigen/SparseExtra>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "eigshape/fem.hpp"

using namespace eigshape;

namespace {

Eigen::VectorXd random_vector(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = d(rng);
    }
    return v;
}

double max_abs(const SparseMatrix& m)
{
    double r = 0.0;
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            r = std::max(r, std::abs(it.value()));
        }
    }
    return r;
}

} // namespace

TEST(Fem, ReferenceRightTriangleStiffness)
{
    const ElementMatrices em = element_matrices(SpaceKind::CG, {0, 0}, {1, 0}, {0, 1});
    Eigen::Matrix3d k;
    k << 2, -1, -1, -1, 1, 0, -1, 0, 1;
    k *= 0.5;
    EXPECT_LT((em.stiffness - k).norm(), 1e-15);
    Eigen::Matrix3d m;
    m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    m *= 0.5 / 12.0;
    EXPECT_LT((em.mass - m).norm(), 1e-16);
}

TEST(Fem, MassMatchesQuadratureOracle)
{
    // Edge-midpoint quadrature is exact for quadratics on a triangle.
    const Point2 p0{0.1, 0.2}, p1{1.3, -0.1}, p2{0.4, 0.9};
    const ElementMatrices em = element_matrices(SpaceKind::CG, p0, p1, p2);
    const double area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    const double bary[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double q = 0.0;
            for (const auto& b : bary) {
                q += b[i] * b[j];
            }
            EXPECT_NEAR(em.mass(i, j), area / 3.0 * q, 1e-15);
        }
    }
}

TEST(Fem, CrouzeixRaviartElement)
{
    const ElementMatrices em = element_matrices(SpaceKind::CR, {0, 0}, {1, 0}, {0, 1});
    EXPECT_LT((em.mass - Eigen::Matrix3d::Identity() / 6.0).norm(), 1e-16);
    // CR stiffness equals 4x the P1 stiffness on the same element.
    const ElementMatrices cg = element_matrices(SpaceKind::CG, {0, 0}, {1, 0}, {0, 1});
    EXPECT_LT((em.stiffness - 4.0 * cg.stiffness).norm(), 1e-14);
}

TEST(Fem, UnconstrainedRowSumsVanish)
{
    const Mesh mesh(triangle_of(ShapeParam(1.2, 1.1)), 6);
    for (SpaceKind kind : {SpaceKind::CG, SpaceKind::CR}) {
        const FemSpace space(mesh, kind, false);
        const FemSystem sys = assemble(space);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.n_dofs());
        EXPECT_LT((sys.stiffness * ones).cwiseAbs().maxCoeff(), 1e-13);
        // Total mass equals the triangle area.
        EXPECT_NEAR(ones.dot(sys.mass * ones), triangle_of(ShapeParam(1.2, 1.1)).signed_area(), 1e-13);
    }
}

TEST(Fem, DerivativeCouplingsSumToStiffness)
{
    const Mesh mesh(triangle_of(ShapeParam::regular()), 8);
    for (SpaceKind kind : {SpaceKind::CG, SpaceKind::CR}) {
        const FemSystem sys = assemble(FemSpace(mesh, kind));
        const SparseMatrix diff = sys.d.dxx + sys.d.dyy - sys.stiffness;
        EXPECT_LT(max_abs(diff), 1e-12);
        const SparseMatrix asym = SparseMatrix(sys.stiffness.transpose()) - sys.stiffness;
        EXPECT_LT(max_abs(asym), 1e-14);
    }
}

TEST(Fem, IdentityFormIsEnergy)
{
    const Mesh mesh(triangle_of(ShapeParam(0.9, 1.3)), 10);
    const FemSystem sys = assemble(FemSpace(mesh, SpaceKind::CG));
    const Eigen::VectorXd u = random_vector(static_cast<int>(sys.mass.rows()), 1);
    const SymMatrix2 id{1.0, 0.0, 1.0};
    const double e = energy_inner(sys, u, u);
    EXPECT_NEAR(f_p_form(id, sys, u, u), e, 1e-12 * e);
    const Interval enc = f_p_form(to_interval(id), sys, u, u);
    EXPECT_TRUE(enc.contains(e));
}

TEST(Fem, RadialFormMatchesExplicitExpression)
{
    const ShapeParam p = ShapeParam::regular();
    const Mesh mesh(triangle_of(p), 12);
    const FemSystem sys = assemble(FemSpace(mesh, SpaceKind::CG));
    const int n = static_cast<int>(sys.mass.rows());
    const Eigen::VectorXd u = random_vector(n, 2);
    const Eigen::VectorXd v = random_vector(n, 3);
    const GradientProducts g = gradient_products(sys, u, v);
    const double explicit_form = g.xy_sym.mid() / (p.r() * std::tan(p.theta())) + 2.0 / p.r() * g.yy.mid();
    const double via_matrix = f_p_form(limit_perturbation(Direction::radial(), p), sys, u, v);
    EXPECT_NEAR(via_matrix, explicit_form, 1e-12 * std::abs(explicit_form));
    const Interval enc = f_p_form(perturbation_matrix(Direction::radial(), p, Interval(0.0)), sys, u, v);
    EXPECT_TRUE(enc.contains(via_matrix));
}

TEST(Fem, FormIsSymmetric)
{
    const Mesh mesh(triangle_of(ShapeParam(1.1, 0.7)), 9);
    const FemSystem sys = assemble(FemSpace(mesh, SpaceKind::CR));
    const int n = static_cast<int>(sys.mass.rows());
    const Eigen::VectorXd u = random_vector(n, 4);
    const Eigen::VectorXd v = random_vector(n, 5);
    const SymMatrix2 p{0.3, -1.2, 2.5};
    const double a = f_p_form(p, sys, u, v);
    const double b = f_p_form(p, sys, v, u);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
}

TEST(Fem, DimensionMismatchRejected)
{
    const Mesh mesh(triangle_of(ShapeParam::regular()), 4);
    const FemSystem sys = assemble(FemSpace(mesh, SpaceKind::CG));
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(2);
    EXPECT_THROW(l2_inner(sys, u, u), DimensionMismatch);
    EXPECT_THROW(f_p_form(SymMatrix2{1, 0, 1}, sys, u, u), DimensionMismatch);
}

TEST(Fem, DofCountsMatchMesh)
{
    const Mesh mesh(triangle_of(ShapeParam::regular()), 16);
    const DofCounts c = dof_counts(mesh);
    EXPECT_EQ(FemSpace(mesh, SpaceKind::CG).n_dofs(), c.cg_interior);
    EXPECT_EQ(FemSpace(mesh, SpaceKind::CR).n_dofs(), c.cr_interior);
}

TEST(Fem, PoissonEnergyConverges)
{
    // -Laplace u = 1: the discrete energy b^T u increases to the exact value at second order.
    std::vector<double> energy;
    for (int n : {4, 8, 16, 32, 64}) {
        const Mesh mesh(triangle_of(ShapeParam::regular()), n);
        const FemSpace space(mesh, SpaceKind::CG);
        const FemSystem sys = assemble(space);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(space.n_dofs());
        for (int e = 0; e < static_cast<int>(mesh.elements().size()); ++e) {
            for (int d : space.element_dofs(e)) {
                if (d >= 0) {
                    b(d) += mesh.element_area(e) / 3.0;
                }
            }
        }
        Eigen::SimplicialLDLT<SparseMatrix> solver(sys.stiffness);
        const Eigen::VectorXd u = solver.solve(b);
        energy.push_back(b.dot(u));
    }
    for (std::size_t i = 1; i < energy.size(); ++i) {
        EXPECT_GT(energy[i], energy[i - 1]);
    }
    for (std::size_t i = 2; i < energy.size(); ++i) {
        const double ratio = (energy[i - 1] - energy[i - 2]) / (energy[i] - energy[i - 1]);
        EXPECT_GT(ratio, 3.0);
    }
}

TEST(Fem, MatrixMarketRoundTrip)
{
    const Mesh mesh(triangle_of(ShapeParam::regular()), 5);
    const FemSystem sys = assemble(FemSpace(mesh, SpaceKind::CG));
    const std::filesystem::path path = std::filesystem::temp_directory_path() / "eigshape_stiffness.mtx";
    write_matrix_market(sys.stiffness, path.string());
    SparseMatrix back;
    ASSERT_TRUE(Eigen::loadMarket(back, path.string()));
    EXPECT_LT(max_abs(back - sys.stiffness), 1e-15);
    std::filesystem::remove(path);
}
