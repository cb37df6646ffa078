#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace slowvary;
using slowvary::testing::rat;

namespace {

struct CellModel {
    SpectralSplit<double> split;
    ReducedModel<double> model;
};

CellModel reduce_cell(const CellProblem& cell, int order = 2)
{
    const auto fam = homogenisation_cell(cell);
    auto split = spectral_split(fam.base(), std::nullopt, order);
    auto model = construct_reduction(fam, split, order).model;
    return {std::move(split), std::move(model)};
}

double coeff(const CellModel& c, MultiIndex n) { return c.model.A(n)(0, 0); }

// Independent 1-D periodic cell problem for K = K(y1):
// solve D-(Kf (D+ chi + 1)) = 0 with mean(chi) = 0, then
// A_(2,0) = mean(K) + mean(Kf D+ chi).
double layered_oracle(const CellProblem& cell)
{
    const int n = cell.n;
    const double d = cell.h / n;
    VectorXd kf(n), kn(n);
    for (int i = 0; i < n; ++i) {
        kf(i) = cell.k_function((i + 0.5) * d, 0.0);
        kn(i) = cell.K(i, 0);
    }
    MatrixXd sys = MatrixXd::Zero(n + 1, n + 1);
    VectorXd rhs = VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n, im = (i + n - 1) % n;
        sys(i, ip) += kf(i) / (d * d);
        sys(i, im) += kf(im) / (d * d);
        sys(i, i) -= (kf(i) + kf(im)) / (d * d);
        sys(i, n) = 1.0;
        sys(n, i) = 1.0;
        rhs(i) = -(kf(i) - kf(im)) / d;
    }
    const VectorXd chi = sys.fullPivLu().solve(rhs).head(n);
    double flux = 0.0;
    for (int i = 0; i < n; ++i)
        flux += kf(i) * (chi((i + 1) % n) - chi(i)) / d;
    return kn.mean() + flux / n;
}

} // namespace

TEST(Walker, ModalBaseAndAdvection)
{
    const auto fam = random_walker_modal();
    EXPECT_EQ(fam.base(), rat({{0, 0, 0}, {0, -1, 0}, {0, 0, -3}}));
    // Hand-derived T diag(-1, 1, -1) T^{-1} with T the modal transform.
    EXPECT_EQ(fam.at({1, 0}), rat({{Rational(-1, 3), 0, Rational(-4, 3)}, {0, -1, 0}, {Rational(-2, 3), 0, Rational(1, 3)}}));
    EXPECT_EQ(fam.labels(), (std::vector<std::string>{"u0", "u1", "u2"}));
}

TEST(Walker, PhysicalFamilyRows)
{
    const auto fam = random_walker_physical();
    // dp1/dt = -dp1/dx - dp1/dy + (p2 - p1)
    EXPECT_EQ(fam.base()(0, 0), Rational(-1));
    EXPECT_EQ(fam.base()(0, 1), Rational(1));
    EXPECT_EQ(fam.base()(0, 2), Rational(0));
    EXPECT_EQ(fam.at({1, 0})(0, 0), Rational(-1));
    EXPECT_EQ(fam.at({0, 1})(0, 0), Rational(-1));
    const Matrix<Rational> ones = slowvary::testing::rat_column({1, 1, 1});
    EXPECT_TRUE(is_exactly_zero(fam.base() * ones));
}

TEST(Walker, ModalTransformCheck)
{
    EXPECT_EQ(modal_transform_check(), 0.0);
    const auto modal = random_walker_modal();
    EXPECT_EQ(modal_transform_check(modal, modal, Matrix<Rational>(Matrix<Rational>::Identity(3, 3))), 0.0);
    auto ops = modal.operators();
    ops.at({1, 0})(1, 2) += Rational(1, 1000);
    const OperatorFamily<Rational> perturbed(2, 3, ops);
    EXPECT_GE(modal_transform_check(random_walker_physical(), perturbed, walker_modal_transform()), 0.999e-3);
}

TEST(Homogenisation, ConstantDiffusivity)
{
    for (double k0 : {1.0, 2.5}) {
        const auto cell = make_cell("constant", {{"K0", k0}}, 16);
        const auto fam = homogenisation_cell(cell);
        EXPECT_EQ(fam.at({2, 0}), MatrixXd(k0 * MatrixXd::Identity(256, 256)));
        const auto c = reduce_cell(cell);
        EXPECT_NEAR(coeff(c, {2, 0}), k0, 1e-10);
        EXPECT_NEAR(coeff(c, {0, 2}), k0, 1e-10);
        for (const MultiIndex n : {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1}, MultiIndex{1, 1}})
            EXPECT_NEAR(coeff(c, n), 0.0, 1e-10) << n.str();
    }
}

TEST(Homogenisation, BaseIsPeriodicLaplacianForUnitK)
{
    const auto fam = homogenisation_cell(make_cell("constant", {}, 8));
    const MatrixXd& L0 = fam.base();
    const double inv_d2 = 64.0;
    EXPECT_DOUBLE_EQ(L0(0, 0), -4 * inv_d2);
    EXPECT_DOUBLE_EQ(L0(0, 1), inv_d2);
    EXPECT_DOUBLE_EQ(L0(0, 7), inv_d2);
    EXPECT_DOUBLE_EQ(L0(0, 8), inv_d2);
    EXPECT_DOUBLE_EQ(L0(0, 56), inv_d2);
    EXPECT_LE((L0 * VectorXd::Ones(64)).norm(), 1e-9);
}

TEST(Homogenisation, LayeredMatchesOneDimensionalOracle)
{
    for (int n : {16, 32}) {
        const auto cell = make_cell("layered_cos", {{"a", 0.5}}, n);
        const auto c = reduce_cell(cell);
        EXPECT_NEAR(coeff(c, {2, 0}), layered_oracle(cell), 1e-10);
        EXPECT_NEAR(coeff(c, {2, 0}), std::sqrt(0.75), 0.01 * std::sqrt(0.75));
        EXPECT_NEAR(coeff(c, {0, 2}), 1.0, 0.01);
        EXPECT_NEAR(coeff(c, {1, 0}), 0.0, 1e-10);
        EXPECT_NEAR(coeff(c, {0, 1}), 0.0, 1e-10);
        EXPECT_GE(gap_ratio(c.split.beta, cell), 0.9);
    }
}

TEST(Homogenisation, RandomMediumIsBracketedByMeans)
{
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> k(0.5, 2.0);
    CellProblem cell;
    cell.n = 8;
    cell.K.resize(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            cell.K(i, j) = k(rng);
    const auto c = reduce_cell(cell);
    for (const MultiIndex n : {MultiIndex{2, 0}, MultiIndex{0, 2}}) {
        EXPECT_GE(coeff(c, n), cell.harmonic_mean() * (1 - 1e-12)) << n.str();
        EXPECT_LE(coeff(c, n), cell.arithmetic_mean() * (1 + 1e-12)) << n.str();
    }
    EXPECT_NEAR(coeff(c, {1, 0}), 0.0, 1e-10);
    EXPECT_NEAR(coeff(c, {0, 1}), 0.0, 1e-10);
}

TEST(Homogenisation, InputValidation)
{
    auto kind = [](const std::function<void()>& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind([] { homogenisation_cell(make_cell("constant", {}, 2)); }), ErrorKind::GridTooCoarse);
    EXPECT_EQ(kind([] { homogenisation_cell(make_cell("constant", {}, 7)); }), ErrorKind::GridTooCoarse);
    EXPECT_EQ(kind([] { homogenisation_cell(make_cell("layered_cos", {{"a", 1.5}}, 8)); }),
              ErrorKind::NonPositiveDiffusivity);
    EXPECT_EQ(kind([] { make_cell("marble", {}, 8); }), ErrorKind::InvalidArgument);
}
