#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "slowvary/error.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/multiindex.hpp"
#include "slowvary/operator_family.hpp"

namespace slowvary {

namespace detail {

inline Matrix<Rational> rational_matrix(std::initializer_list<std::initializer_list<Rational>> rows)
{
    Matrix<Rational> out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (const auto& v : row)
            out(i, j++) = v;
        ++i;
    }
    return out;
}

} // namespace detail

/// Three-state random walker in its modal coordinates (mean field u0, fast
/// modes u1, u2).
inline OperatorFamily<Rational> random_walker_modal()
{
    using detail::rational_matrix;
    const Rational z(0), one(1), third(1, 3), two_thirds(2, 3), four_thirds(4, 3);
    OperatorFamily<Rational>::OperatorMap ops;
    ops.emplace(MultiIndex{0, 0}, rational_matrix({{z, z, z}, {z, -one, z}, {z, z, Rational(-3)}}));
    ops.emplace(MultiIndex{1, 0},
                rational_matrix({{-third, z, -four_thirds}, {z, -one, z}, {-two_thirds, z, third}}));
    ops.emplace(MultiIndex{0, 1}, rational_matrix({{z, -two_thirds, z}, {-one, z, -one}, {z, -third, z}}));
    return OperatorFamily<Rational>(2, 3, std::move(ops), {"u0", "u1", "u2"});
}

/// The same walker in state probabilities p1, p2, p3.
inline OperatorFamily<Rational> random_walker_physical()
{
    using detail::rational_matrix;
    const Rational z(0), one(1);
    OperatorFamily<Rational>::OperatorMap ops;
    ops.emplace(MultiIndex{0, 0}, rational_matrix({{-one, one, z}, {one, Rational(-2), one}, {z, one, -one}}));
    ops.emplace(MultiIndex{1, 0}, rational_matrix({{-one, z, z}, {z, one, z}, {z, z, -one}}));
    ops.emplace(MultiIndex{0, 1}, rational_matrix({{-one, z, z}, {z, z, z}, {z, z, one}}));
    return OperatorFamily<Rational>(2, 3, std::move(ops), {"p1", "p2", "p3"});
}

/// p -> u: u0 = (p1+p2+p3)/3, u1 = (p1-p3)/2, u2 = (p1-2p2+p3)/6.
inline Matrix<Rational> walker_modal_transform()
{
    const Rational z(0);
    return detail::rational_matrix({{Rational(1, 3), Rational(1, 3), Rational(1, 3)},
                                    {Rational(1, 2), z, Rational(-1, 2)},
                                    {Rational(1, 6), Rational(-1, 3), Rational(1, 6)}});
}

/// max over keys of |T L_k^from T^{-1} - L_k^to|; missing keys count as zero.
template <class T>
double modal_transform_check(const OperatorFamily<T>& from, const OperatorFamily<T>& to, const Matrix<T>& transform)
{
    if (from.dim_u() != to.dim_u() || transform.rows() != from.dim_u() || transform.cols() != from.dim_u())
        fail(ErrorKind::InvalidArgument, "transform and families must share dimU");
    const Matrix<T> inv = small_inverse<T>(transform);
    std::map<MultiIndex, bool> keys;
    for (const auto& k : from.support())
        keys[k] = true;
    for (const auto& k : to.support())
        keys[k] = true;
    const Matrix<T> zero = Matrix<T>::Zero(from.dim_u(), from.dim_u());
    double worst = 0.0;
    for (const auto& [k, unused] : keys) {
        const Matrix<T>* a = from.find(k);
        const Matrix<T>* b = to.find(k);
        const Matrix<T> mapped = transform * (a ? *a : zero) * inv;
        worst = std::max(worst, max_abs(Matrix<T>(mapped - (b ? *b : zero))));
    }
    return worst;
}

inline double modal_transform_check()
{
    return modal_transform_check(random_walker_physical(), random_walker_modal(), walker_modal_transform());
}

/// Periodic cell [0,h)^2 sampled on an n x n node grid; K(i1, i2) at
/// y = (i1 h/n, i2 h/n). `k_function`, when set, gives K at arbitrary points
/// and is used for face values.
struct CellProblem {
    double h = 1.0;
    int n = 0;
    MatrixXd K;
    std::function<double(double, double)> k_function;
    std::string k_expr;                      // built-in name, if any
    std::map<std::string, double> params;    // its parameters

    double k_min() const { return K.minCoeff(); }
    double arithmetic_mean() const { return K.mean(); }
    double harmonic_mean() const { return 1.0 / K.cwiseInverse().mean(); }
};

inline void validate_cell(const CellProblem& cell)
{
    if (!(cell.h > 0) || !std::isfinite(cell.h))
        fail(ErrorKind::InvalidArgument, "cell period h must be positive");
    if (cell.n < 4 || cell.n % 2 != 0)
        fail(ErrorKind::GridTooCoarse, "cell grid must be even and at least 4, got " + std::to_string(cell.n));
    if (cell.K.rows() != cell.n || cell.K.cols() != cell.n)
        fail(ErrorKind::InvalidArgument, "K samples must be n x n");
    if (!cell.K.allFinite() || !(cell.K.minCoeff() > 0))
        fail(ErrorKind::NonPositiveDiffusivity, "diffusivity must be positive everywhere");
}

/// Built-in K fields: "constant" (K0), "layered_cos" K0(1 + a cos(2 pi y1/h)),
/// "checkerboard_smooth" K0(1 + a cos(2 pi y1/h) cos(2 pi y2/h)).
inline CellProblem make_cell(const std::string& expr, std::map<std::string, double> params, int n, double h = 1.0)
{
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        if (it == params.end()) {
            params[key] = fallback;
            return fallback;
        }
        return it->second;
    };
    const double k0 = get("K0", 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    CellProblem cell;
    cell.h = h;
    cell.n = n;
    cell.k_expr = expr;
    if (expr == "constant") {
        cell.k_function = [k0](double, double) { return k0; };
    } else if (expr == "layered_cos") {
        const double a = get("a", 0.5);
        cell.k_function = [=](double y1, double) { return k0 * (1.0 + a * std::cos(two_pi * y1 / h)); };
    } else if (expr == "checkerboard_smooth") {
        const double a = get("a", 0.5);
        cell.k_function = [=](double y1, double y2) {
            return k0 * (1.0 + a * std::cos(two_pi * y1 / h) * std::cos(two_pi * y2 / h));
        };
    } else {
        fail(ErrorKind::InvalidArgument, "unknown K expression '" + expr + "'");
    }
    cell.params = std::move(params);
    if (n < 1)
        fail(ErrorKind::GridTooCoarse, "cell grid must be even and at least 4");
    const double d = h / n;
    cell.K.resize(n, n);
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            cell.K(i1, i2) = cell.k_function(i1 * d, i2 * d);
    return cell;
}

/// Embedded cell operators on node index p = i1 n + i2, spacing d = h/n:
///   L_0      conservative flux form of div(K grad) with face diffusivities
///   L_(1,0)  (K_{i+1/2} u_{i+1} - K_{i-1/2} u_{i-1}) / d   ~ K_y1 + 2 K d/dy1
///   L_(0,1)  same along y2
///   L_(2,0) = L_(0,2) = diag(K)
inline OperatorFamily<double> homogenisation_cell(const CellProblem& cell)
{
    validate_cell(cell);
    const int n = cell.n;
    const double d = cell.h / n;
    const Eigen::Index size = static_cast<Eigen::Index>(n) * n;
    auto idx = [n](int i1, int i2) {
        return static_cast<Eigen::Index>((i1 + n) % n) * n + (i2 + n) % n;
    };
    // face1(i1,i2): between (i1,i2) and (i1+1,i2); face2 likewise along y2.
    MatrixXd face1(n, n), face2(n, n);
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2) {
            if (cell.k_function) {
                face1(i1, i2) = cell.k_function((i1 + 0.5) * d, i2 * d);
                face2(i1, i2) = cell.k_function(i1 * d, (i2 + 0.5) * d);
            } else {
                face1(i1, i2) = 0.5 * (cell.K(i1, i2) + cell.K((i1 + 1) % n, i2));
                face2(i1, i2) = 0.5 * (cell.K(i1, i2) + cell.K(i1, (i2 + 1) % n));
            }
        }
    if (!(face1.minCoeff() > 0) || !(face2.minCoeff() > 0))
        fail(ErrorKind::NonPositiveDiffusivity, "face diffusivity must be positive");

    MatrixXd l0 = MatrixXd::Zero(size, size);
    MatrixXd l10 = MatrixXd::Zero(size, size);
    MatrixXd l01 = MatrixXd::Zero(size, size);
    MatrixXd kdiag = MatrixXd::Zero(size, size);
    const double inv_d = 1.0 / d, inv_d2 = inv_d * inv_d;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2) {
            const Eigen::Index p = idx(i1, i2);
            const double e = face1(i1, i2), w = face1((i1 + n - 1) % n, i2);
            const double s = face2(i1, i2), q = face2(i1, (i2 + n - 1) % n);
            l0(p, idx(i1 + 1, i2)) += e * inv_d2;
            l0(p, idx(i1 - 1, i2)) += w * inv_d2;
            l0(p, idx(i1, i2 + 1)) += s * inv_d2;
            l0(p, idx(i1, i2 - 1)) += q * inv_d2;
            l0(p, p) -= (e + w + s + q) * inv_d2;
            l10(p, idx(i1 + 1, i2)) += e * inv_d;
            l10(p, idx(i1 - 1, i2)) -= w * inv_d;
            l01(p, idx(i1, i2 + 1)) += s * inv_d;
            l01(p, idx(i1, i2 - 1)) -= q * inv_d;
            kdiag(p, p) = cell.K(i1, i2);
        }
    OperatorFamily<double>::OperatorMap ops;
    ops.emplace(MultiIndex{0, 0}, std::move(l0));
    ops.emplace(MultiIndex{1, 0}, std::move(l10));
    ops.emplace(MultiIndex{0, 1}, std::move(l01));
    ops.emplace(MultiIndex{2, 0}, kdiag);
    ops.emplace(MultiIndex{0, 2}, std::move(kdiag));
    return OperatorFamily<double>(2, static_cast<int>(size), std::move(ops));
}

/// beta relative to the continuum bound 4 pi^2 K_min / h^2.
inline double gap_ratio(double beta, const CellProblem& cell)
{
    return beta / (4.0 * std::numbers::pi * std::numbers::pi * cell.k_min() / (cell.h * cell.h));
}

} // namespace slowvary
