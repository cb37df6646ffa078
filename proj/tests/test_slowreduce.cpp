#include <gtest/gtest.h>

#include "support.hpp"

using namespace slowvary;
using slowvary::testing::rat_column;

namespace {

ReductionResult<Rational> walker_exact(int order)
{
    const auto fam = random_walker_modal();
    return construct_reduction(fam, spectral_split_exact(fam.base(), std::nullopt, order), order);
}

Rational a(const ReducedModel<Rational>& m, MultiIndex n) { return m.A(n)(0, 0); }

double coefficient_gap(const ReducedModel<double>& x, const ReducedModel<double>& y)
{
    double worst = 0.0;
    for (const auto& [n, c] : x.coeffs)
        worst = std::max(worst, (c - y.A(n)).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace

TEST(Reduction, WalkerOrderTwoExact)
{
    const auto r = walker_exact(2);
    EXPECT_EQ(a(r.model, {0, 0}), Rational(0));
    EXPECT_EQ(a(r.model, {1, 0}), Rational(-1, 3));
    EXPECT_EQ(a(r.model, {0, 1}), Rational(0));
    EXPECT_EQ(a(r.model, {2, 0}), Rational(8, 27));
    EXPECT_EQ(a(r.model, {1, 1}), Rational(0));
    EXPECT_EQ(a(r.model, {0, 2}), Rational(2, 3));
    EXPECT_EQ(r.model.coeffs.size(), 6u);
}

TEST(Reduction, WalkerOrderThreeExact)
{
    const auto r = walker_exact(3);
    EXPECT_EQ(a(r.model, {3, 0}), Rational(16, 243));
    EXPECT_EQ(a(r.model, {2, 1}), Rational(0));
    EXPECT_EQ(a(r.model, {1, 2}), Rational(-20, 27));
    EXPECT_EQ(a(r.model, {0, 3}), Rational(0));
    EXPECT_EQ(a(r.model, {2, 0}), Rational(8, 27));
}

TEST(Reduction, WalkerBasisVectors)
{
    const auto r = walker_exact(2);
    EXPECT_EQ(r.basis.V({0, 0}), rat_column({1, 0, 0}));
    EXPECT_EQ(r.basis.V({1, 0}), rat_column({0, 0, Rational(-2, 9)}));
    EXPECT_EQ(r.basis.V({0, 1}), rat_column({0, -1, 0}));
    EXPECT_EQ(r.basis.V({2, 0}), rat_column({0, 0, Rational(-4, 81)}));
    EXPECT_EQ(r.basis.V({1, 1}), rat_column({0, Rational(8, 9), 0}));
    EXPECT_EQ(r.basis.V({0, 2}), rat_column({0, 0, Rational(1, 9)}));
}

TEST(Reduction, WalkerFloatMatchesGoldens)
{
    const auto fam = random_walker_modal().to_double();
    const auto r = construct_reduction(fam, spectral_split(fam.base(), std::nullopt, 3), 3);
    EXPECT_NEAR(r.model.A({1, 0})(0, 0), -1.0 / 3, 1e-12);
    EXPECT_NEAR(r.model.A({2, 0})(0, 0), 8.0 / 27, 1e-12);
    EXPECT_NEAR(r.model.A({0, 2})(0, 0), 2.0 / 3, 1e-12);
    EXPECT_NEAR(r.model.A({3, 0})(0, 0), 16.0 / 243, 1e-12);
    EXPECT_NEAR(r.model.A({1, 2})(0, 0), -20.0 / 27, 1e-12);
    for (const MultiIndex n : {MultiIndex{0, 0}, MultiIndex{0, 1}, MultiIndex{1, 1}, MultiIndex{2, 1}, MultiIndex{0, 3}})
        EXPECT_NEAR(r.model.A(n)(0, 0), 0.0, 1e-12);
}

TEST(Reduction, PhysicalWalkerGivesSameModel)
{
    const auto fam = random_walker_physical();
    const auto r = construct_reduction(fam, spectral_split_exact(fam.base(), std::nullopt, 3), 3);
    const auto modal = walker_exact(3);
    for (const auto& [n, c] : modal.model.coeffs)
        EXPECT_EQ(r.model.A(n), c) << n.str();
}

TEST(Reduction, BaseOnlyFamilyHasNoCoupling)
{
    const auto fam = slowvary::testing::only_base(slowvary::testing::rat({{0, 0, 0}, {0, -1, 0}, {0, 0, -3}}));
    const auto r = construct_reduction(fam, spectral_split_exact(fam.base(), std::nullopt, 3), 3);
    for (const auto& [n, c] : r.model.coeffs)
        EXPECT_TRUE(is_exactly_zero(c)) << n.str();
    for (const auto& [n, v] : r.basis.vectors)
        if (!n.is_zero())
            EXPECT_TRUE(is_exactly_zero(v)) << n.str();
    EXPECT_EQ(check_invariance(fam, r.model, r.basis).max_residual, 0.0);
}

TEST(GeneratingVectors, WalkerPolynomials)
{
    const auto r = walker_exact(2);
    const auto poly = generating_vectors(r.basis, enumerate_indices(2, 2));
    const auto& p00 = poly.at({0, 0});
    ASSERT_EQ(p00.size(), 1u);
    EXPECT_EQ(p00.at({0, 0}), rat_column({1, 0, 0}));
    // (xi1^2/2, 0, -4/81 - 2 xi1/9)
    const auto& p20 = poly.at({2, 0});
    EXPECT_EQ(p20.at({0, 0}), rat_column({0, 0, Rational(-4, 81)}));
    EXPECT_EQ(p20.at({1, 0}), rat_column({0, 0, Rational(-2, 9)}));
    EXPECT_EQ(p20.at({2, 0}), rat_column({Rational(1, 2), 0, 0}));
}

TEST(GeneratingVectors, SingleEntryBasisGivesMonomials)
{
    GeneratingBasis<Rational> basis;
    const IndexTable table(2, 3);
    for (const auto& n : table)
        basis.vectors.emplace(n, n.is_zero() ? rat_column({1, 2}) : rat_column({0, 0}));
    const auto poly = generating_vectors(basis, table);
    for (const auto& n : table) {
        const Rational inv_fact(1, static_cast<long>(n.factorial()));
        EXPECT_EQ(poly.at(n).at(n), Matrix<Rational>(rat_column({1, 2}) * inv_fact));
    }
}

TEST(Invariance, WalkerResidualIsExactlyZero)
{
    const auto fam = random_walker_modal();
    for (int order : {2, 3, 4}) {
        const auto r = walker_exact(order);
        EXPECT_EQ(check_invariance(fam, r.model, r.basis).max_residual, 0.0);
    }
}

TEST(Invariance, DetectsACorruptedCoefficient)
{
    const auto fam = random_walker_modal();
    auto r = walker_exact(2);
    r.model.coeffs.at({2, 0})(0, 0) += Rational(1, 1000);
    EXPECT_GE(check_invariance(fam, r.model, r.basis).max_residual, 0.9e-3);
}

TEST(Invariance, RandomGappedFamilies)
{
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const auto fam = slowvary::testing::random_gapped_family(rng, 4, 1 + trial % 2);
        const auto split = spectral_split(fam.base(), std::nullopt, 2);
        const auto r = construct_reduction(fam, split, 2);
        EXPECT_LE(check_invariance(fam, r.model, r.basis).max_residual, 1e-10);
    }
}

TEST(Reduction, DirectRouteAgreesOnRandomFamilies)
{
    std::mt19937 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim_u = 2 + trial % 4;
        const int order = 1 + trial % 3;
        const int m = dim_u > 2 && trial % 5 == 0 ? 2 : 1;
        const auto fam = slowvary::testing::random_gapped_family(rng, dim_u, m);
        const auto split = spectral_split(fam.base(), std::nullopt, order);
        const auto main = construct_reduction(fam, split, order);
        const auto direct = construct_reduction_direct(fam, split, order);
        EXPECT_LE(coefficient_gap(main.model, direct.model), 1e-12) << "trial " << trial;
    }
}

TEST(Reduction, DirectRouteExactOnWalker)
{
    const auto fam = random_walker_modal();
    const auto split = spectral_split_exact(fam.base(), std::nullopt, 3);
    const auto direct = construct_reduction_direct(fam, split, 3);
    const auto main = construct_reduction(fam, split, 3);
    for (const auto& [n, c] : main.model.coeffs)
        EXPECT_EQ(direct.model.A(n), c);
}

TEST(Reduction, WorkOrderAndThreadCountDoNotChangeResults)
{
    std::mt19937 rng(5);
    const auto fam = slowvary::testing::random_gapped_family(rng, 5);
    const auto split = spectral_split(fam.base(), std::nullopt, 4);
    const auto reference = construct_reduction(fam, split, 4, ReductionOptions{1e-10, 1, std::nullopt});
    for (unsigned workers : {2u, 4u})
        for (unsigned seed : {1u, 2u, 3u}) {
            const auto r = construct_reduction(fam, split, 4, ReductionOptions{1e-10, workers, seed});
            for (const auto& [n, c] : reference.model.coeffs)
                EXPECT_EQ(r.model.A(n), c) << n.str();
        }
}

TEST(Reduction, ThreadEnvironmentVariable)
{
    setenv("SLOWVARY_THREADS", "3", 1);
    EXPECT_EQ(worker_count(), 3u);
    setenv("SLOWVARY_THREADS", "1", 1);
    EXPECT_EQ(worker_count(), 1u);
    unsetenv("SLOWVARY_THREADS");
    EXPECT_GE(worker_count(), 1u);
}

TEST(Reduction, OrderZeroKeepsOnlyTheBaseCoefficient)
{
    const auto fam = random_walker_modal();
    const auto split = spectral_split_exact(fam.base(), std::nullopt, 1);
    const auto r = construct_reduction(fam, split, 0);
    ASSERT_EQ(r.model.coeffs.size(), 1u);
    EXPECT_EQ(a(r.model, {0, 0}), Rational(0));
    EXPECT_THROW(construct_reduction(fam, split, -1), Error);
}
