#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "slowvary/error.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/multiindex.hpp"
#include "slowvary/operator_family.hpp"
#include "slowvary/parallel.hpp"
#include "slowvary/spectral_split.hpp"
#include "slowvary/sylvester.hpp"

namespace slowvary {

/// Polynomial in xi with matrix coefficients, keyed by monomial exponent.
template <class T>
using PolyMatrix = std::map<MultiIndex, Matrix<T>>;

/// Macroscale model dU/dt = sum_{|n|<=N} A_n d^n U / dx^n.
template <class T>
struct ReducedModel {
    int order = 0;
    int dims = 0;
    int m = 0;
    std::map<MultiIndex, Matrix<T>> coeffs;

    const Matrix<T>& A(const MultiIndex& n) const
    {
        auto it = coeffs.find(n);
        if (it == coeffs.end())
            fail(ErrorKind::InvalidArgument, "model has no coefficient for " + n.str());
        return it->second;
    }

    ReducedModel<double> to_double() const
    {
        ReducedModel<double> out{order, dims, m, {}};
        for (const auto& [n, a] : coeffs)
            out.coeffs.emplace(n, slowvary::to_double(a));
        return out;
    }
};

/// V^n for |n| <= N, plus the generating polynomials
///   Vt^n(xi) = sum_{k<=n} V^{n-k} xi^k / k!
/// stored by monomial: poly[n][k] = V^{n-k} / k!.
template <class T>
struct GeneratingBasis {
    std::map<MultiIndex, Matrix<T>> vectors;
    std::map<MultiIndex, PolyMatrix<T>> poly;

    const Matrix<T>& V(const MultiIndex& n) const
    {
        auto it = vectors.find(n);
        if (it == vectors.end())
            fail(ErrorKind::InvalidArgument, "basis has no vector for " + n.str());
        return it->second;
    }
};

template <class T>
struct ReductionResult {
    ReducedModel<T> model;
    GeneratingBasis<T> basis;
    double max_solve_residual = 0.0;
};

struct ReductionOptions {
    double tol = 1e-10;
    unsigned workers = 0;                // 0: worker_count()
    std::optional<unsigned> shuffle;     // permute the work order within each grade
};

namespace detail {

template <class T>
T count_scalar(std::uint64_t v)
{
    if constexpr (ScalarTraits<T>::exact)
        return T(static_cast<long long>(v));
    else
        return static_cast<double>(v);
}

/// prod_i a_i! / (a_i - b_i)!
inline std::uint64_t falling_factorial(const MultiIndex& a, const MultiIndex& b)
{
    std::uint64_t out = 1;
    for (int i = 0; i < a.dims(); ++i)
        for (int j = a[i] - b[i] + 1; j <= a[i]; ++j)
            out = checked_mul(out, static_cast<std::uint64_t>(j));
    return out;
}

inline std::vector<size_t> work_order(size_t count, const ReductionOptions& opt, int grade)
{
    std::vector<size_t> order(count);
    std::iota(order.begin(), order.end(), size_t{0});
    if (opt.shuffle) {
        std::mt19937 rng(*opt.shuffle + static_cast<unsigned>(grade));
        std::shuffle(order.begin(), order.end(), rng);
    }
    return order;
}

template <class T>
void check_inputs(const OperatorFamily<T>& fam, const SpectralSplit<T>& split, int order)
{
    if (order < 0)
        fail(ErrorKind::InvalidArgument, "order must be non-negative");
    fam.base();
    if (split.V0.rows() != fam.dim_u() || split.Z0.rows() != fam.dim_u() || split.V0.cols() != split.m ||
        split.Z0.cols() != split.m)
        fail(ErrorKind::InvalidArgument, "split does not match the operator family");
}

} // namespace detail

/// Ṽ^n for every n from the vectors V^n.
template <class T>
std::map<MultiIndex, PolyMatrix<T>> generating_vectors(const GeneratingBasis<T>& basis, const IndexTable& table)
{
    std::map<MultiIndex, PolyMatrix<T>> out;
    for (const auto& n : table) {
        PolyMatrix<T> p;
        for (const auto& k : table) {
            if (k.order() > n.order() || !partial_leq(k, n))
                continue;
            p.emplace(k, basis.V(n - k) / detail::count_scalar<T>(k.factorial()));
        }
        out.emplace(n, std::move(p));
    }
    return out;
}

/// Graded recursion: for 0 < |n| <= N
///   A_n = sum_{0<|k|, k<=n} Z0^T L_k V^{n-k}
///   L0 V^n - V^n A0 = -sum L_k V^{n-k} + sum V^{n-k} A_k,   Z0^T V^n = 0.
template <class T>
ReductionResult<T> construct_reduction(const OperatorFamily<T>& fam, const SpectralSplit<T>& split, int order,
                                       const ReductionOptions& opt = {})
{
    detail::check_inputs(fam, split, order);
    const Matrix<T>& L0 = fam.base();
    const IndexTable table(fam.dims(), order);
    const MultiIndex zero = MultiIndex::zero(fam.dims());

    ReductionResult<T> out;
    out.model.order = order;
    out.model.dims = fam.dims();
    out.model.m = split.m;
    const Matrix<T> a0 = split.Z0.transpose() * (L0 * split.V0);
    out.model.coeffs.emplace(zero, a0);
    out.basis.vectors.emplace(zero, split.V0);

    std::vector<std::pair<MultiIndex, const Matrix<T>*>> spatial;
    for (const auto& [k, op] : fam.operators())
        if (!k.is_zero())
            spatial.emplace_back(k, &op);

    std::optional<ConstrainedSylvesterSolver<T>> solver;
    if (order > 0)
        solver.emplace(L0, a0, split.V0, split.Z0, opt.tol);

    for (int g = 1; g <= order; ++g) {
        const auto grade = table.grade(g);
        std::vector<Matrix<T>> a_out(grade.size()), v_out(grade.size());
        std::vector<double> resid(grade.size(), 0.0);
        const auto perm = detail::work_order(grade.size(), opt, g);
        parallel_for(
            grade.size(),
            [&](size_t w) {
                const size_t i = perm[w];
                const MultiIndex& n = grade[i];
                Matrix<T> lv = Matrix<T>::Zero(fam.dim_u(), split.m);
                for (const auto& [k, op] : spatial)
                    if (k.order() <= g && partial_leq(k, n))
                        lv += (*op) * out.basis.V(n - k);
                Matrix<T> an = split.Z0.transpose() * lv;
                Matrix<T> rhs = -lv + split.V0 * an;
                for (const auto& [k, ak] : out.model.coeffs)
                    if (!k.is_zero() && k.order() < g && partial_leq(k, n))
                        rhs += out.basis.V(n - k) * ak;
                auto sol = solver->solve(rhs);
                a_out[i] = std::move(an);
                v_out[i] = std::move(sol.V);
                resid[i] = sol.residual;
            },
            opt.workers ? opt.workers : worker_count());
        for (size_t i = 0; i < grade.size(); ++i) {
            out.model.coeffs.emplace(grade[i], std::move(a_out[i]));
            out.basis.vectors.emplace(grade[i], std::move(v_out[i]));
            out.max_solve_residual = std::max(out.max_solve_residual, resid[i]);
        }
    }
    out.basis.poly = generating_vectors(out.basis, table);
    return out;
}

/// Second construction path: each Ṽ^n is solved for coefficient by
/// coefficient from the invariance identity itself, highest monomial first,
/// with Z0^T [Ṽ^n]_j = delta_{jn} I / n!. A_n is read off from the
/// xi^0 coefficient's centre projection. Shares no intermediate with
/// construct_reduction beyond L0, V0, Z0.
template <class T>
ReductionResult<T> construct_reduction_direct(const OperatorFamily<T>& fam, const SpectralSplit<T>& split, int order,
                                              double tol = 1e-10)
{
    detail::check_inputs(fam, split, order);
    const Matrix<T>& L0 = fam.base();
    const IndexTable table(fam.dims(), order);
    const MultiIndex zero = MultiIndex::zero(fam.dims());
    const Eigen::Index d = fam.dim_u();
    const Eigen::Index m = split.m;

    ReductionResult<T> out;
    out.model.order = order;
    out.model.dims = fam.dims();
    out.model.m = split.m;
    const Matrix<T> a0 = split.Z0.transpose() * (L0 * split.V0);
    out.model.coeffs.emplace(zero, a0);
    out.basis.poly[zero].emplace(zero, split.V0);

    std::optional<ConstrainedSylvesterSolver<T>> solver;
    if (order > 0)
        solver.emplace(L0, a0, split.V0, split.Z0, tol);

    for (size_t pos = 1; pos < table.size(); ++pos) {
        const MultiIndex& n = table[pos];
        std::vector<MultiIndex> monomials;
        for (const auto& j : table)
            if (j.order() <= n.order() && partial_leq(j, n))
                monomials.push_back(j);
        std::reverse(monomials.begin(), monomials.end());  // highest grade first

        PolyMatrix<T> coef;
        Matrix<T> an;
        for (const auto& j : monomials) {
            // sum_{l != 0} L_l (j+l)!/j! C_{j+l}
            Matrix<T> lhs = Matrix<T>::Zero(d, m);
            for (const auto& [l, op] : fam.operators()) {
                if (l.is_zero())
                    continue;
                const MultiIndex jl = j + l;
                auto it = coef.find(jl);
                if (it == coef.end())
                    continue;
                lhs += op * it->second * detail::count_scalar<T>(detail::falling_factorial(jl, l));
            }
            // sum_{0<k<n, k<=n} [Ṽ^{n-k}]_j A_k
            Matrix<T> known = Matrix<T>::Zero(d, m);
            for (const auto& [k, ak] : out.model.coeffs) {
                if (k.is_zero() || k == n || !partial_leq(k, n))
                    continue;
                const auto& lower = out.basis.poly.at(n - k);
                auto it = lower.find(j);
                if (it != lower.end())
                    known += it->second * ak;
            }
            Matrix<T> rhs = known - lhs;
            if (j.is_zero()) {
                an = split.Z0.transpose() * lhs - split.Z0.transpose() * known;
                rhs += split.V0 * an;
            }
            Matrix<T> g = Matrix<T>::Zero(m, m);
            if (j == n)
                g = Matrix<T>::Identity(m, m) / detail::count_scalar<T>(n.factorial());
            auto sol = solver->solve(rhs, g);
            out.max_solve_residual = std::max(out.max_solve_residual, sol.residual);
            coef.emplace(j, std::move(sol.V));
        }
        out.model.coeffs.emplace(n, std::move(an));
        out.basis.poly.emplace(n, std::move(coef));
    }
    for (const auto& n : table)
        out.basis.vectors.emplace(n, out.basis.poly.at(n).at(zero));
    return out;
}

struct InvarianceResult {
    double max_residual = 0.0;
    std::map<MultiIndex, double> per_index;
};

/// max over n and xi-coefficients of
///   sum_l L_l d^l/dxi^l Ṽ^n - sum_{k<=n} Ṽ^{n-k} A_k.
/// Exactly zero in rational arithmetic for a correct construction.
template <class T>
InvarianceResult check_invariance(const OperatorFamily<T>& fam, const ReducedModel<T>& model,
                                  const GeneratingBasis<T>& basis)
{
    InvarianceResult out;
    const Eigen::Index d = fam.dim_u();
    const Eigen::Index m = model.m;
    for (const auto& [n, p] : basis.poly) {
        double worst = 0.0;
        for (const auto& [j, cj] : p) {
            Matrix<T> lhs = Matrix<T>::Zero(d, m);
            for (const auto& [l, op] : fam.operators()) {
                auto it = p.find(j + l);
                if (it == p.end())
                    continue;
                lhs += op * it->second * detail::count_scalar<T>(detail::falling_factorial(j + l, l));
            }
            Matrix<T> rhs = Matrix<T>::Zero(d, m);
            for (const auto& [k, ak] : model.coeffs) {
                if (k.order() > n.order() || !partial_leq(k, n))
                    continue;
                auto lower = basis.poly.find(n - k);
                if (lower == basis.poly.end())
                    continue;
                auto it = lower->second.find(j);
                if (it != lower->second.end())
                    rhs += it->second * ak;
            }
            worst = std::max(worst, max_abs(Matrix<T>(lhs - rhs)));
        }
        out.per_index.emplace(n, worst);
        out.max_residual = std::max(out.max_residual, worst);
    }
    return out;
}

} // namespace slowvary
