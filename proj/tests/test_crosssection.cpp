#include <gtest/gtest.h>

#include "support.hpp"

using namespace slowvary;
using slowvary::testing::rat;
using slowvary::testing::rat_column;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::InvalidArgument;
}

MatrixXd diag3() { return VectorXd((VectorXd(3) << 0, -1, -3).finished()).asDiagonal(); }

} // namespace

TEST(SpectralSplit, DiagonalBase)
{
    const auto s = spectral_split(diag3(), 0.0, 2);
    EXPECT_EQ(s.m, 1);
    EXPECT_NEAR(s.beta, 1.0, 1e-14);
    EXPECT_LE((s.V0 - Eigen::Vector3d(1, 0, 0)).norm(), 1e-14);
    EXPECT_LE((s.Z0 - Eigen::Vector3d(1, 0, 0)).norm(), 1e-14);
}

TEST(SpectralSplit, NegativeIdentityHasNoCentre)
{
    for (int n : {1, 3, 5})
        EXPECT_EQ(kind_of([&] { spectral_split(-MatrixXd::Identity(n, n), 0.0, 2); }), ErrorKind::NoCentreMode);
}

TEST(SpectralSplit, UnstableEigenvalueRejected)
{
    const MatrixXd L0 = VectorXd((VectorXd(2) << 0, 0.5).finished()).asDiagonal();
    EXPECT_EQ(kind_of([&] { spectral_split(L0, std::nullopt, 2); }), ErrorKind::UnstableMode);
}

TEST(SpectralSplit, WalkerMixingMatrix)
{
    MatrixXd L0(3, 3);
    L0 << -1, 1, 0, 1, -2, 1, 0, 1, -1;
    const auto s = spectral_split(L0, std::nullopt, 2);
    EXPECT_EQ(s.m, 1);
    EXPECT_NEAR(s.beta, 1.0, 1e-12);
    // V0 is proportional to (1,1,1) and Z0^T V0 = 1.
    EXPECT_LE((s.V0 - s.V0(0) * Eigen::Vector3d::Ones()).norm(), 1e-12);
    EXPECT_NEAR((s.Z0.transpose() * s.V0)(0, 0), 1.0, 1e-12);
    EXPECT_LE((L0 * s.V0).norm(), 1e-12);
    EXPECT_LE((L0.transpose() * s.Z0).norm(), 1e-12);
    std::vector<double> eig;
    for (Eigen::Index i = 0; i < 3; ++i)
        eig.push_back(s.eigenvalues(i).real());
    std::sort(eig.begin(), eig.end());
    EXPECT_NEAR(eig[0], -3, 1e-12);
    EXPECT_NEAR(eig[1], -1, 1e-12);
    EXPECT_NEAR(eig[2], 0, 1e-12);
}

TEST(SpectralSplit, NonsymmetricBaseUsesOrderedSchur)
{
    MatrixXd L0(3, 3);
    L0 << 0, 1, 2, 0, -1, 5, 0, 0, -2;
    const auto s = spectral_split(L0, std::nullopt, 2);
    EXPECT_FALSE(s.symmetric);
    EXPECT_EQ(s.m, 1);
    EXPECT_NEAR(s.beta, 1.0, 1e-12);
    EXPECT_NEAR((s.Z0.transpose() * s.V0)(0, 0), 1.0, 1e-12);
    EXPECT_LE((L0 * s.V0).norm(), 1e-12);
    EXPECT_LE((s.Z0.transpose() * L0).norm(), 1e-12);
}

TEST(SpectralSplit, ExactSplitOfWalker)
{
    const auto s = spectral_split_exact(random_walker_physical().base(), std::nullopt, 2);
    EXPECT_EQ(s.m, 1);
    EXPECT_EQ(s.V0, rat_column({1, 1, 1}));
    EXPECT_EQ(s.Z0, rat_column({Rational(1, 3), Rational(1, 3), Rational(1, 3)}));
}

TEST(SpectralSplit, TwoDimensionalCentre)
{
    std::mt19937 rng(7);
    const auto fam = slowvary::testing::random_gapped_family(rng, 4, 2);
    const auto s = spectral_split(fam.base(), std::nullopt, 2);
    EXPECT_EQ(s.m, 2);
    EXPECT_LE((s.Z0.transpose() * s.V0 - MatrixXd::Identity(2, 2)).norm(), 1e-10);
    EXPECT_LE((fam.base() * s.V0).norm(), 1e-10);
}

TEST(ValidateFamily, WalkerPassesWithUnitMargin)
{
    const auto fam = random_walker_modal();
    const auto s = spectral_split_exact(fam.base(), 0.0, 2);
    const auto r = validate_family(fam, s, 2);
    EXPECT_TRUE(r.passed);
    EXPECT_DOUBLE_EQ(r.gap_margin, 1.0);
    EXPECT_EQ(r.binormalisation_residual, 0.0);
    EXPECT_LE(r.trace_residual, 1e-12);
}

TEST(ValidateFamily, GapBoundaryIsStrict)
{
    const auto fam = random_walker_modal().to_double();
    EXPECT_EQ(kind_of([&] {
                  const auto s = spectral_split(fam.base(), 0.5, 2);
                  validate_family(fam, s, 2);
              }),
              ErrorKind::GapViolation);
}

TEST(ValidateFamily, MissingBaseOperator)
{
    OperatorFamily<double>::OperatorMap ops;
    ops.emplace(MultiIndex{1, 0}, MatrixXd::Identity(2, 2));
    const OperatorFamily<double> fam(2, 2, ops);
    EXPECT_EQ(kind_of([&] { fam.base(); }), ErrorKind::MissingBaseOperator);
}

TEST(ConstrainedSylvester, DiagonalSolve)
{
    const Matrix<Rational> L0 = rat({{0, 0, 0}, {0, -1, 0}, {0, 0, -3}});
    const Matrix<Rational> e1 = rat_column({1, 0, 0});
    const Matrix<Rational> A0 = Matrix<Rational>::Zero(1, 1);
    const Rational r(5, 7);
    const auto V = solve_constrained_sylvester(L0, A0, e1, e1, rat_column({0, 0, r}));
    EXPECT_EQ(V, rat_column({0, 0, -r / Rational(3)}));
    EXPECT_EQ(solve_constrained_sylvester(L0, A0, e1, e1, rat_column({0, 0, 0})), rat_column({0, 0, 0}));
}

TEST(ConstrainedSylvester, WalkerFirstStep)
{
    const auto fam = random_walker_modal();
    const Matrix<Rational> e1 = rat_column({1, 0, 0});
    const Matrix<Rational>& L10 = fam.at(MultiIndex{1, 0});
    const Matrix<Rational> A10 = e1.transpose() * L10 * e1;
    EXPECT_EQ(A10(0, 0), Rational(-1, 3));
    const Matrix<Rational> rhs = -L10 * e1 + e1 * A10;
    const auto V = solve_constrained_sylvester(fam.base(), Matrix<Rational>(Matrix<Rational>::Zero(1, 1)), e1, e1, rhs);
    EXPECT_EQ(V, rat_column({0, 0, Rational(-2, 9)}));
}

TEST(ConstrainedSylvester, RightHandSideInTheCentreIsInconsistent)
{
    const MatrixXd e1 = Eigen::Vector3d(1, 0, 0);
    EXPECT_EQ(kind_of([&] {
                  solve_constrained_sylvester(diag3(), MatrixXd(MatrixXd::Zero(1, 1)), e1, e1, MatrixXd(Eigen::Vector3d(1, 0, 0)));
              }),
              ErrorKind::SylvesterInconsistent);
}

TEST(ConstrainedSylvester, RandomFloatSolveSatisfiesEquation)
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto fam = slowvary::testing::random_gapped_family(rng, 5, 1 + trial % 2);
        const auto s = spectral_split(fam.base(), std::nullopt, 2);
        const MatrixXd A0 = s.Z0.transpose() * fam.base() * s.V0;
        MatrixXd rhs = MatrixXd::Random(5, s.m);
        rhs -= s.V0 * (s.Z0.transpose() * rhs);  // remove the centre component
        const auto V = solve_constrained_sylvester(fam.base(), A0, s.V0, s.Z0, rhs);
        EXPECT_LE((fam.base() * V - V * A0 - rhs).norm(), 1e-10);
        EXPECT_LE((s.Z0.transpose() * V).norm(), 1e-10);
    }
}
