#pragma once

#include <random>

#include "slowvary/slowvary.hpp"

namespace slowvary::testing {

inline Matrix<Rational> rat(std::initializer_list<std::initializer_list<Rational>> rows)
{
    return detail::rational_matrix(rows);
}

inline Matrix<Rational> rat_column(std::initializer_list<Rational> entries)
{
    Matrix<Rational> out(static_cast<Eigen::Index>(entries.size()), 1);
    Eigen::Index i = 0;
    for (const auto& e : entries)
        out(i++, 0) = e;
    return out;
}

/// M = 2 family with L0 = S diag(0 (m times), -lambda...) S^{-1}, stable
/// rates in [0.5, 3], and random L_(1,0), L_(0,1), L_(2,0) entries in [-1, 1].
inline OperatorFamily<double> random_gapped_family(std::mt19937& rng, int dim_u, int m = 1)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0), rate(0.5, 3.0);
    MatrixXd S = MatrixXd::Identity(dim_u, dim_u);
    for (int i = 0; i < dim_u; ++i)
        for (int j = 0; j < dim_u; ++j)
            S(i, j) += 0.3 * unit(rng);
    VectorXd d = VectorXd::Zero(dim_u);
    for (int i = m; i < dim_u; ++i)
        d(i) = -rate(rng);
    OperatorFamily<double>::OperatorMap ops;
    ops.emplace(MultiIndex{0, 0}, MatrixXd(S * d.asDiagonal() * S.inverse()));
    for (const MultiIndex k : {MultiIndex{1, 0}, MultiIndex{0, 1}, MultiIndex{2, 0}}) {
        MatrixXd a(dim_u, dim_u);
        for (int i = 0; i < dim_u; ++i)
            for (int j = 0; j < dim_u; ++j)
                a(i, j) = unit(rng);
        ops.emplace(k, std::move(a));
    }
    return OperatorFamily<double>(2, dim_u, std::move(ops));
}

inline OperatorFamily<Rational> only_base(const Matrix<Rational>& L0, int dims = 2)
{
    OperatorFamily<Rational>::OperatorMap ops;
    ops.emplace(MultiIndex::zero(dims), L0);
    return OperatorFamily<Rational>(dims, static_cast<int>(L0.rows()), std::move(ops));
}

} // namespace slowvary::testing
