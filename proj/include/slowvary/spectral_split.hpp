#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "slowvary/error.hpp"
#include "slowvary/lapack.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/multiindex.hpp"
#include "slowvary/operator_family.hpp"

namespace slowvary {

/// Centre/stable split of L_0. V0 spans the centre subspace, Z0 the matching
/// left subspace with Z0^T V0 = I.
template <class T>
struct SpectralSplit {
    int m = 0;
    Matrix<T> V0;
    Matrix<T> Z0;
    double alpha = 0.0;
    double beta = 0.0;           // +inf when every eigenvalue is central
    VectorXc eigenvalues;        // all eigenvalues of L_0
    bool symmetric = false;      // symmetric eigensolver path taken

    int dim_u() const { return static_cast<int>(V0.rows()); }
};

namespace detail {

inline bool is_symmetric(const MatrixXd& a)
{
    const double scale = std::max(max_abs(a), 1.0);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (std::abs(a(i, j) - a(j, i)) > 1e-14 * scale)
                return false;
    return true;
}

/// Scales a single centre column so its largest entry is +1 and Z0 by the
/// reciprocal, keeping Z0^T V0 = 1.
template <class T>
void canonicalise_single(Matrix<T>& v0, Matrix<T>& z0)
{
    if (v0.cols() != 1)
        return;
    const double peak = max_abs(v0);
    if (peak == 0.0)
        return;
    Eigen::Index pick = 0;
    for (Eigen::Index i = 0; i < v0.rows(); ++i)
        if (std::abs(ScalarTraits<T>::to_double(v0(i, 0))) >= (1.0 - 1e-10) * peak) {
            pick = i;
            break;
        }
    const T s = v0(pick, 0);
    v0 /= s;
    z0 *= s;
}

struct Classification {
    int m = 0;
    double alpha = 0.0;
    double beta = std::numeric_limits<double>::infinity();
    double threshold = 0.0;
};

inline Classification classify(const VectorXc& eig, std::optional<double> alpha, int order)
{
    Classification c;
    double radius = 0.0;
    for (Eigen::Index i = 0; i < eig.size(); ++i)
        radius = std::max(radius, std::abs(eig(i)));
    c.alpha = alpha ? *alpha : 1e-9 * radius;
    if (c.alpha < 0 || !std::isfinite(c.alpha))
        fail(ErrorKind::InvalidArgument, "alpha must be a finite non-negative number");
    // Rounding slack so an exactly-zero eigenvalue computed as 1e-16 still
    // counts as central when alpha = 0.
    c.threshold = c.alpha + 1e3 * std::numeric_limits<double>::epsilon() * std::max(radius, 1.0);
    double max_unstable = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        const double re = eig(i).real();
        if (std::abs(re) <= c.threshold)
            ++c.m;
        else
            max_unstable = std::max(max_unstable, re);
    }
    if (c.m == 0)
        fail(ErrorKind::NoCentreMode, "no eigenvalue of L_0 has |Re| <= alpha = " + ScalarTraits<double>::format(c.alpha));
    if (max_unstable > c.threshold)
        fail(ErrorKind::UnstableMode,
             "L_0 has an eigenvalue with real part " + ScalarTraits<double>::format(max_unstable) + " > alpha");
    if (std::isfinite(max_unstable))
        c.beta = -max_unstable;
    if (!(c.beta > order * c.alpha))
        fail(ErrorKind::GapViolation, "beta = " + ScalarTraits<double>::format(c.beta) + " is not above N*alpha = " +
                                          ScalarTraits<double>::format(order * c.alpha));
    return c;
}

} // namespace detail

/// Floating-point centre/stable split of L0 for truncation order N. alpha
/// defaults to 1e-9 times the spectral radius.
inline SpectralSplit<double> spectral_split(const MatrixXd& L0, std::optional<double> alpha, int order)
{
    if (L0.rows() != L0.cols() || L0.rows() == 0)
        fail(ErrorKind::InvalidArgument, "L_0 must be square and non-empty");
    if (!L0.allFinite())
        fail(ErrorKind::InvalidArgument, "L_0 has non-finite entries");
    if (order < 0)
        fail(ErrorKind::InvalidArgument, "order must be non-negative");

    SpectralSplit<double> out;
    out.symmetric = detail::is_symmetric(L0);
    if (out.symmetric)
        out.eigenvalues = lapack::symmetric_eigenvalues(L0).cast<std::complex<double>>();
    else
        out.eigenvalues = lapack::eigenvalues(L0);

    const auto c = detail::classify(out.eigenvalues, alpha, order);
    out.m = c.m;
    out.alpha = c.alpha;
    out.beta = c.beta;
    const Eigen::Index n = L0.rows();

    if (out.symmetric) {
        auto pairs = lapack::symmetric_top_pairs(L0, c.m);
        out.V0 = std::move(pairs.vectors);
        out.Z0 = out.V0;
    } else {
        auto schur = lapack::ordered_schur(L0, c.threshold);
        if (schur.selected != c.m)
            fail(ErrorKind::DefectiveNormalisation, "Schur reordering could not isolate the centre eigenvalues");
        out.V0 = schur.q.leftCols(c.m);
        if (c.m == n) {
            out.Z0 = out.V0;
        } else {
            const MatrixXd x = lapack::triangular_sylvester(schur.t.topLeftCorner(c.m, c.m),
                                                            schur.t.bottomRightCorner(n - c.m, n - c.m),
                                                            schur.t.topRightCorner(c.m, n - c.m));
            if (!x.allFinite() || max_abs(x) > 1.0 / std::sqrt(std::numeric_limits<double>::epsilon()))
                fail(ErrorKind::DefectiveNormalisation, "<Z0,V0> is numerically singular");
            MatrixXd stacked(n, c.m);
            stacked.topRows(c.m).setIdentity();
            stacked.bottomRows(n - c.m) = x.transpose();
            out.Z0 = schur.q * stacked;
        }
    }
    detail::canonicalise_single(out.V0, out.Z0);
    return out;
}

/// Exact split for a rational L0 whose centre eigenvalues are exactly zero
/// and semisimple. Classification (m, alpha, beta) comes from the float path.
inline SpectralSplit<Rational> spectral_split_exact(const Matrix<Rational>& L0, std::optional<double> alpha, int order)
{
    const auto approx = spectral_split(to_double(L0), alpha, order);
    SpectralSplit<Rational> out;
    out.m = approx.m;
    out.alpha = approx.alpha;
    out.beta = approx.beta;
    out.eigenvalues = approx.eigenvalues;
    out.symmetric = approx.symmetric;

    Matrix<Rational> v0 = exact_nullspace<Rational>(L0);
    Matrix<Rational> z0 = exact_nullspace<Rational>(L0.transpose());
    if (v0.cols() != approx.m || z0.cols() != approx.m)
        fail(ErrorKind::ExactModeUnsupported,
             "exact mode needs the centre eigenvalues to be exact zeros (nullity " + std::to_string(v0.cols()) +
                 ", centre dimension " + std::to_string(approx.m) + ")");
    const Matrix<Rational> gram = z0.transpose() * v0;
    if (!gram.fullPivLu().isInvertible())
        fail(ErrorKind::ExactModeUnsupported, "zero eigenvalue of L_0 is defective; exact mode unsupported");
    z0 = z0 * small_inverse<Rational>(gram).transpose();
    detail::canonicalise_single(v0, z0);
    out.V0 = std::move(v0);
    out.Z0 = std::move(z0);
    return out;
}

/// Diagnostics for a family/split pair at order N.
struct ValidationReport {
    int m = 0;
    int order = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double gap_margin = 0.0;           // beta - N alpha
    double binormalisation_residual = 0.0;
    double invariance_residual = 0.0;  // ||L0 V0 - V0 A0||_F
    double invariance_scale = 0.0;     // ||L0||_F
    double trace_residual = 0.0;       // |sum(eig) - trace|
    std::vector<MultiIndex> support;
    bool passed = false;
    std::vector<std::string> failures;
};

template <class T>
ValidationReport validate_family(const OperatorFamily<T>& fam, const SpectralSplit<T>& split, int order,
                                 double tol = 1e-10)
{
    const Matrix<T>& L0 = fam.base();
    if (split.V0.rows() != fam.dim_u() || split.Z0.rows() != fam.dim_u())
        fail(ErrorKind::InvalidArgument, "split does not match the family's dimU");
    if (!(split.beta > order * split.alpha))
        fail(ErrorKind::GapViolation, "beta = " + ScalarTraits<double>::format(split.beta) +
                                          " is not above N*alpha = " + ScalarTraits<double>::format(order * split.alpha));

    ValidationReport r;
    r.m = split.m;
    r.order = order;
    r.alpha = split.alpha;
    r.beta = split.beta;
    r.gap_margin = split.beta - order * split.alpha;
    r.support = fam.support();

    const Matrix<T> gram = split.Z0.transpose() * split.V0;
    r.binormalisation_residual = max_abs(Matrix<T>(gram - Matrix<T>::Identity(split.m, split.m)));
    const Matrix<T> lv = L0 * split.V0;
    const Matrix<T> a0 = split.Z0.transpose() * lv;
    r.invariance_residual = to_double(Matrix<T>(lv - split.V0 * a0)).norm();
    r.invariance_scale = to_double(L0).norm();
    std::complex<double> sum = 0;
    for (Eigen::Index i = 0; i < split.eigenvalues.size(); ++i)
        sum += split.eigenvalues(i);
    r.trace_residual = std::abs(sum - std::complex<double>(to_double(L0).trace(), 0.0));

    if (r.binormalisation_residual > tol)
        r.failures.push_back("binormalisation residual " + ScalarTraits<double>::format(r.binormalisation_residual));
    if (r.invariance_residual > tol * std::max(r.invariance_scale, 1.0))
        r.failures.push_back("centre invariance residual " + ScalarTraits<double>::format(r.invariance_residual));
    if (r.trace_residual > tol * fam.dim_u() * std::max(r.invariance_scale, 1.0))
        r.failures.push_back("eigenvalue/trace mismatch " + ScalarTraits<double>::format(r.trace_residual));
    r.passed = r.failures.empty();
    return r;
}

} // namespace slowvary
