#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <lapacke.h>

#include "slowvary/error.hpp"
#include "slowvary/linalg.hpp"

namespace slowvary::lapack {

namespace detail {

inline thread_local double select_threshold = 0.0;

inline lapack_logical select_centre(const double* re, const double* /*im*/)
{
    return std::abs(*re) <= select_threshold ? 1 : 0;
}

inline lapack_int to_int(Eigen::Index n) { return static_cast<lapack_int>(n); }

} // namespace detail

struct SchurResult {
    MatrixXd t;            // quasi-upper-triangular Schur form
    MatrixXd q;            // orthogonal Schur vectors, A = Q T Q^T
    int selected = 0;      // leading block size holding the selected eigenvalues
    VectorXc eigenvalues;  // in Schur order
};

/// Real Schur decomposition with eigenvalues |Re| <= threshold moved to the
/// leading block.
inline SchurResult ordered_schur(const MatrixXd& a, double threshold)
{
    const lapack_int n = detail::to_int(a.rows());
    SchurResult out;
    out.t = a;
    out.q.resize(n, n);
    std::vector<double> wr(static_cast<size_t>(n)), wi(static_cast<size_t>(n));
    lapack_int sdim = 0;
    detail::select_threshold = threshold;
    const lapack_int info = LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', &detail::select_centre, n, out.t.data(), n,
                                          &sdim, wr.data(), wi.data(), out.q.data(), n);
    // info == n+2: reordering perturbed an eigenvalue across the threshold;
    // the Schur form itself is still valid.
    if (info < 0 || (info > 0 && info != n + 2))
        fail(ErrorKind::DefectiveNormalisation, "Schur decomposition failed (dgees info " + std::to_string(info) + ")");
    out.selected = static_cast<int>(sdim);
    out.eigenvalues.resize(n);
    for (lapack_int i = 0; i < n; ++i)
        out.eigenvalues(i) = {wr[static_cast<size_t>(i)], wi[static_cast<size_t>(i)]};
    return out;
}

/// All eigenvalues of a symmetric matrix, ascending.
inline VectorXd symmetric_eigenvalues(const MatrixXd& a)
{
    const lapack_int n = detail::to_int(a.rows());
    MatrixXd work = a;
    VectorXd w(n);
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'A', 'U', n, work.data(), n, 0.0, 0.0, 0, 0, 0.0,
                                           &found, w.data(), nullptr, 1, isuppz.data());
    if (info != 0)
        fail(ErrorKind::DefectiveNormalisation, "symmetric eigensolve failed (dsyevr info " + std::to_string(info) + ")");
    return w;
}

struct SymmetricPairs {
    VectorXd values;   // ascending
    MatrixXd vectors;  // orthonormal columns
};

/// The `count` largest eigenpairs of a symmetric matrix.
inline SymmetricPairs symmetric_top_pairs(const MatrixXd& a, int count)
{
    const lapack_int n = detail::to_int(a.rows());
    if (count < 1 || count > n)
        fail(ErrorKind::InvalidArgument, "requested eigenpair count out of range");
    MatrixXd work = a;
    SymmetricPairs out;
    out.values.resize(count);
    out.vectors.resize(n, count);
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(count));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, work.data(), n, 0.0, 0.0,
                                           n - count + 1, n, 0.0, &found, out.values.data(), out.vectors.data(), n,
                                           isuppz.data());
    if (info != 0 || found != count)
        fail(ErrorKind::DefectiveNormalisation, "symmetric eigensolve failed (dsyevr info " + std::to_string(info) + ")");
    return out;
}

/// Solves T11 X - X T22 = C for quasi-triangular T11, T22. Returns X.
inline MatrixXd triangular_sylvester(const MatrixXd& t11, const MatrixXd& t22, const MatrixXd& c)
{
    const lapack_int m = detail::to_int(t11.rows());
    const lapack_int n = detail::to_int(t22.rows());
    MatrixXd x = c;
    double scale = 1.0;
    const lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'N', 'N', -1, m, n, t11.data(), m, t22.data(), n,
                                           x.data(), m, &scale);
    if (info != 0)
        fail(ErrorKind::DefectiveNormalisation,
             "centre and stable spectra are too close to separate (dtrsyl info " + std::to_string(info) + ")");
    return x / scale;
}

/// Eigenvalues of a general real matrix.
inline VectorXc eigenvalues(const MatrixXd& a)
{
    const lapack_int n = detail::to_int(a.rows());
    MatrixXd work = a;
    std::vector<double> wr(static_cast<size_t>(n)), wi(static_cast<size_t>(n));
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(), wi.data(),
                                          nullptr, 1, nullptr, 1);
    if (info != 0)
        fail(ErrorKind::DefectiveNormalisation, "eigensolve failed (dgeev info " + std::to_string(info) + ")");
    VectorXc out(n);
    for (lapack_int i = 0; i < n; ++i)
        out(i) = {wr[static_cast<size_t>(i)], wi[static_cast<size_t>(i)]};
    return out;
}

} // namespace slowvary::lapack
