#include <gtest/gtest.h>

#include <set>

#include "slowvary/multiindex.hpp"

using namespace slowvary;

namespace {

// Brute-force count of lattice points with |n| <= order.
std::uint64_t brute_count(int dims, int order)
{
    std::uint64_t count = 0;
    std::vector<int> n(static_cast<size_t>(dims), 0);
    while (true) {
        int s = 0;
        for (int v : n)
            s += v;
        if (s <= order)
            ++count;
        size_t d = 0;
        while (d < n.size() && ++n[d] > order)
            n[d++] = 0;
        if (d == n.size())
            return count;
    }
}

} // namespace

TEST(MultiIndex, TwoDimsOrderTwoListsSixIndicesInGradedOrder)
{
    const auto t = enumerate_indices(2, 2);
    const std::vector<MultiIndex> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    ASSERT_EQ(t.size(), expected.size());
    for (size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(t[i], expected[i]);
        EXPECT_EQ(t.position(expected[i]), i);
    }
}

TEST(MultiIndex, OrderZeroHasOnlyTheZeroIndex)
{
    const auto t = enumerate_indices(1, 0);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_TRUE(t[0].is_zero());
    EXPECT_EQ(index_count(4, 0), 1u);
}

TEST(MultiIndex, CountsMatchBruteForce)
{
    EXPECT_EQ(index_count(3, 4), 35u);
    EXPECT_EQ(brute_count(3, 4), 35u);
    EXPECT_EQ(index_count(2, 2), 6u);
    EXPECT_EQ(index_count(2, 3), 10u);
    for (int dims = 1; dims <= 3; ++dims)
        for (int order = 0; order <= 6; ++order) {
            EXPECT_EQ(index_count(dims, order), brute_count(dims, order)) << dims << " " << order;
            EXPECT_EQ(enumerate_indices(dims, order).size(), brute_count(dims, order));
        }
}

TEST(MultiIndex, TableIsABijectionOntoTheLattice)
{
    for (int dims = 1; dims <= 3; ++dims)
        for (int order = 0; order <= 6; ++order) {
            const auto t = enumerate_indices(dims, order);
            std::set<MultiIndex> seen;
            for (size_t i = 0; i < t.size(); ++i) {
                EXPECT_LE(t[i].order(), order);
                EXPECT_TRUE(seen.insert(t[i]).second);
                EXPECT_EQ(t.position(t[i]), i);
                if (i > 0) {
                    EXPECT_LT(t[i - 1], t[i]);
                    EXPECT_LE(t[i - 1].order(), t[i].order());
                }
            }
        }
}

TEST(MultiIndex, BinomialExamples)
{
    EXPECT_EQ(multi_binomial({2, 1}, {1, 1}), 2u);
    EXPECT_EQ(multi_binomial({3, 2}, {3, 2}), 1u);
    EXPECT_EQ(multi_binomial({1, 0}, {0, 2}), 0u);
}

TEST(MultiIndex, BinomialSymmetry)
{
    for (const auto& a : enumerate_indices(2, 6))
        for (const auto& b : enumerate_indices(2, 6))
            if (partial_leq(b, a))
                EXPECT_EQ(multi_binomial(a, b), multi_binomial(a, a - b));
}

TEST(MultiIndex, PartialOrder)
{
    EXPECT_TRUE(partial_leq({1, 0}, {2, 1}));
    EXPECT_FALSE(partial_leq({1, 2}, {2, 1}));
    for (const auto& n : enumerate_indices(3, 3))
        EXPECT_TRUE(partial_leq(MultiIndex::zero(3), n));
}

TEST(MultiIndex, ParseAndFormat)
{
    const auto n = MultiIndex::parse("2, 1");
    EXPECT_EQ(n, (MultiIndex{2, 1}));
    EXPECT_EQ(n.str(), "2,1");
    EXPECT_EQ(n.factorial(), 2u);
    EXPECT_THROW(MultiIndex::parse("1,-1"), Error);
    EXPECT_THROW(MultiIndex::parse("a"), Error);
    EXPECT_THROW(MultiIndex({1, 0}) - MultiIndex({0, 1}), Error);
}

TEST(MultiIndex, HugeCountsOverflow)
{
    EXPECT_THROW(index_count(60, 60), Error);
}
