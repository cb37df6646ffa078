#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "slowvary/lapack.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/multiindex.hpp"
#include "slowvary/operator_family.hpp"
#include "slowvary/reduction.hpp"

namespace slowvary {

/// Operator on the stacked Taylor-coefficient state (u^(n))_{|n|<=N}:
/// block (row n, col k) = L_{k-n} for k >= n, else zero.
template <class T>
struct BlockOperator {
    IndexTable table;
    int dim_u = 0;
    Matrix<T> matrix;
};

template <class T>
BlockOperator<T> build_block_operator(const OperatorFamily<T>& fam, int order)
{
    BlockOperator<T> out{IndexTable(fam.dims(), order), fam.dim_u(), {}};
    const Eigen::Index d = fam.dim_u();
    const Eigen::Index count = static_cast<Eigen::Index>(out.table.size());
    out.matrix = Matrix<T>::Zero(count * d, count * d);
    for (Eigen::Index r = 0; r < count; ++r) {
        const MultiIndex& n = out.table[static_cast<size_t>(r)];
        for (Eigen::Index c = r; c < count; ++c) {
            const MultiIndex& k = out.table[static_cast<size_t>(c)];
            if (!partial_leq(n, k))
                continue;
            if (const auto* op = fam.find(k - n))
                out.matrix.block(r * d, c * d, d, d) = *op;
        }
    }
    return out;
}

/// Block matrix with block (n, k) = A_{k-n} for k >= n.
template <class T>
Matrix<T> build_block_A(const ReducedModel<T>& model)
{
    const IndexTable table(model.dims, model.order);
    const Eigen::Index m = model.m;
    const Eigen::Index count = static_cast<Eigen::Index>(table.size());
    Matrix<T> out = Matrix<T>::Zero(count * m, count * m);
    for (Eigen::Index r = 0; r < count; ++r)
        for (Eigen::Index c = r; c < count; ++c) {
            const MultiIndex& n = table[static_cast<size_t>(r)];
            const MultiIndex& k = table[static_cast<size_t>(c)];
            if (partial_leq(n, k))
                out.block(r * m, c * m, m, m) = model.A(k - n);
        }
    return out;
}

/// Columns are the generating polynomials laid out on the Taylor state:
/// block (row k, col n) = k! [Ṽ^n]_k = V^{n-k} for k <= n.
template <class T>
Matrix<T> flatten_basis(const GeneratingBasis<T>& basis, const IndexTable& table)
{
    const Matrix<T>& v0 = basis.V(MultiIndex::zero(table.dims()));
    const Eigen::Index d = v0.rows();
    const Eigen::Index m = v0.cols();
    const Eigen::Index count = static_cast<Eigen::Index>(table.size());
    Matrix<T> out = Matrix<T>::Zero(count * d, count * m);
    for (Eigen::Index c = 0; c < count; ++c) {
        const MultiIndex& n = table[static_cast<size_t>(c)];
        const auto& p = basis.poly.at(n);
        for (Eigen::Index r = 0; r <= c; ++r) {
            const MultiIndex& k = table[static_cast<size_t>(r)];
            auto it = p.find(k);
            if (it != p.end())
                out.block(r * d, c * m, d, m) = it->second * detail::count_scalar<T>(k.factorial());
        }
    }
    return out;
}

/// Frobenius norm of (block) V - V A for the flattened slow basis.
template <class T>
double verify_slow_subspace(const BlockOperator<T>& block, const GeneratingBasis<T>& basis, const Matrix<T>& blockA)
{
    const Matrix<T> flat = flatten_basis(basis, block.table);
    const Matrix<T> resid = block.matrix * flat - flat * blockA;
    return to_double(resid).norm();
}

struct SpectrumReport {
    bool passed = false;
    int copies = 0;                      // expected multiplicity factor
    double max_pair_distance = 0.0;      // greedy pairing of raw eigenvalues
    double max_cluster_error = 0.0;      // |cluster mean - expected eigenvalue|
    bool counts_match = false;
    std::vector<std::complex<double>> distinct;  // distinct eigenvalues of L0
    std::vector<int> expected_counts;
    std::vector<int> found_counts;
};

/// Checks that the block spectrum is the spectrum of L0 repeated `copies`
/// times. Repeated eigenvalues of the block sit in Jordan chains, so the raw
/// values scatter like eps^(1/k); each cluster's mean is still accurate and
/// is what `tol` (relative to the spectral radius) applies to.
inline SpectrumReport block_spectrum_check(const MatrixXd& block, const MatrixXd& L0, double tol = 1e-6)
{
    SpectrumReport r;
    if (L0.rows() == 0 || block.rows() % L0.rows() != 0)
        fail(ErrorKind::InvalidArgument, "block size is not a multiple of dimU");
    r.copies = static_cast<int>(block.rows() / L0.rows());
    const VectorXc base = lapack::eigenvalues(L0);
    const VectorXc full = lapack::eigenvalues(block);
    double radius = 1.0;
    for (Eigen::Index i = 0; i < base.size(); ++i)
        radius = std::max(radius, std::abs(base(i)));

    for (Eigen::Index i = 0; i < base.size(); ++i) {
        bool found = false;
        for (size_t j = 0; j < r.distinct.size(); ++j)
            if (std::abs(base(i) - r.distinct[j]) <= 1e-8 * radius) {
                ++r.expected_counts[j];
                found = true;
                break;
            }
        if (!found) {
            r.distinct.push_back(base(i));
            r.expected_counts.push_back(1);
        }
    }
    for (auto& c : r.expected_counts)
        c *= r.copies;

    r.found_counts.assign(r.distinct.size(), 0);
    std::vector<std::complex<double>> sums(r.distinct.size(), 0.0);
    for (Eigen::Index i = 0; i < full.size(); ++i) {
        size_t best = 0;
        for (size_t j = 1; j < r.distinct.size(); ++j)
            if (std::abs(full(i) - r.distinct[j]) < std::abs(full(i) - r.distinct[best]))
                best = j;
        ++r.found_counts[best];
        sums[best] += full(i);
    }
    r.counts_match = r.found_counts == r.expected_counts;
    for (size_t j = 0; j < r.distinct.size(); ++j)
        if (r.found_counts[j] > 0)
            r.max_cluster_error = std::max(r.max_cluster_error,
                                           std::abs(sums[j] / static_cast<double>(r.found_counts[j]) - r.distinct[j]));

    // Greedy nearest pairing after sorting by (Re, Im).
    auto less = [](std::complex<double> a, std::complex<double> b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::vector<std::complex<double>> want;
    for (int c = 0; c < r.copies; ++c)
        for (Eigen::Index i = 0; i < base.size(); ++i)
            want.push_back(base(i));
    std::vector<std::complex<double>> got(full.data(), full.data() + full.size());
    std::sort(want.begin(), want.end(), less);
    std::sort(got.begin(), got.end(), less);
    std::vector<bool> used(got.size(), false);
    for (const auto& w : want) {
        size_t best = got.size();
        for (size_t j = 0; j < got.size(); ++j)
            if (!used[j] && (best == got.size() || std::abs(got[j] - w) < std::abs(got[best] - w)))
                best = j;
        used[best] = true;
        r.max_pair_distance = std::max(r.max_pair_distance, std::abs(got[best] - w));
    }
    r.passed = r.counts_match && r.max_cluster_error <= tol * radius;
    return r;
}

/// Characteristic polynomial det(lambda I - A), coefficients from the constant
/// term up, via Faddeev-LeVerrier. Exact for Rational.
template <class T>
std::vector<T> characteristic_polynomial(const Matrix<T>& a)
{
    const Eigen::Index n = a.rows();
    std::vector<T> c(static_cast<size_t>(n) + 1, T(0));
    c[static_cast<size_t>(n)] = T(1);
    Matrix<T> mk = Matrix<T>::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        Matrix<T> next = a * mk;
        for (Eigen::Index i = 0; i < n; ++i)
            next(i, i) += c[static_cast<size_t>(n - k + 1)];
        mk = std::move(next);
        const Matrix<T> am = a * mk;
        c[static_cast<size_t>(n - k)] = -am.trace() / T(static_cast<long>(k));
    }
    return c;
}

template <class T>
std::vector<T> polynomial_power(const std::vector<T>& p, int power)
{
    std::vector<T> out{T(1)};
    for (int e = 0; e < power; ++e) {
        std::vector<T> next(out.size() + p.size() - 1, T(0));
        for (size_t i = 0; i < out.size(); ++i)
            for (size_t j = 0; j < p.size(); ++j)
                next[i + j] += out[i] * p[j];
        out = std::move(next);
    }
    return out;
}

/// Exact spectrum check: charpoly(block) == charpoly(L0)^copies.
inline bool block_spectrum_check_exact(const Matrix<Rational>& block, const Matrix<Rational>& L0)
{
    if (L0.rows() == 0 || block.rows() % L0.rows() != 0)
        fail(ErrorKind::InvalidArgument, "block size is not a multiple of dimU");
    const int copies = static_cast<int>(block.rows() / L0.rows());
    return characteristic_polynomial(block) == polynomial_power(characteristic_polynomial(L0), copies);
}

} // namespace slowvary
