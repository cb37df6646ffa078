#pragma once

#include <algorithm>
#include <string>

#include <Eigen/LU>

#include "slowvary/error.hpp"
#include "slowvary/linalg.hpp"

namespace slowvary {

template <class T>
struct SylvesterSolution {
    Matrix<T> V;
    double residual = 0.0;    // max |L0 V - V A0 - RHS|
    double multiplier = 0.0;  // max |Lambda|; zero for a consistent right-hand side
};

/// Solves L0 V - V A0 = RHS subject to Z0^T V = G as one bordered system
///   [ I(x)L0 - A0^T(x)I   I(x)V0 ] [vec V     ]   [vec RHS]
///   [ I(x)Z0^T            0      ] [vec Lambda] = [vec G  ]
/// whose matrix depends only on (L0, A0, V0, Z0): it is factored once and
/// reused for every right-hand side. solve() is const and thread-safe.
template <class T>
class ConstrainedSylvesterSolver {
public:
    ConstrainedSylvesterSolver(const Matrix<T>& L0, const Matrix<T>& A0, const Matrix<T>& V0, const Matrix<T>& Z0,
                               double tol = 1e-10)
        : L0_(L0), A0_(A0), n_(L0.rows()), m_(V0.cols()), tol_(tol), l0_scale_(max_abs(L0))
    {
        if (L0.rows() != L0.cols() || V0.rows() != n_ || Z0.rows() != n_ || Z0.cols() != m_ || A0.rows() != m_ ||
            A0.cols() != m_)
            fail(ErrorKind::InvalidArgument, "inconsistent shapes for the constrained Sylvester system");
        const Eigen::Index nm = n_ * m_;
        const Eigen::Index size = nm + m_ * m_;
        Matrix<T> big = Matrix<T>::Zero(size, size);
        for (Eigen::Index c = 0; c < m_; ++c) {
            big.block(c * n_, c * n_, n_, n_) = L0;
            for (Eigen::Index r = 0; r < m_; ++r) {
                const T a = A0(c, r);  // (A0^T)(r,c) multiplies column block c into row block r
                if (!(a == T(0)))
                    for (Eigen::Index i = 0; i < n_; ++i)
                        big(r * n_ + i, c * n_ + i) -= a;
            }
            big.block(c * n_, nm + c * m_, n_, m_) = V0;
            big.block(nm + c * m_, c * n_, m_, n_) = Z0.transpose();
        }
        lu_.compute(big);
        if constexpr (ScalarTraits<T>::exact) {
            for (Eigen::Index i = 0; i < size; ++i)
                if (lu_.matrixLU()(i, i) == T(0))
                    fail(ErrorKind::SylvesterInconsistent, "bordered Sylvester system is singular");
        } else {
            const double pivot_floor = 1e-13 * std::max(1.0, max_abs(big));
            for (Eigen::Index i = 0; i < size; ++i)
                if (!(std::abs(lu_.matrixLU()(i, i)) > pivot_floor))
                    fail(ErrorKind::SylvesterInconsistent, "bordered Sylvester system is numerically singular");
        }
    }

    Eigen::Index dim_u() const noexcept { return n_; }
    Eigen::Index centre_dim() const noexcept { return m_; }

    /// Z0^T V = 0 constraint.
    SylvesterSolution<T> solve(const Matrix<T>& rhs) const
    {
        return solve(rhs, Matrix<T>::Zero(m_, m_));
    }

    /// Z0^T V = G constraint.
    SylvesterSolution<T> solve(const Matrix<T>& rhs, const Matrix<T>& g) const
    {
        if (rhs.rows() != n_ || rhs.cols() != m_ || g.rows() != m_ || g.cols() != m_)
            fail(ErrorKind::InvalidArgument, "right-hand side has the wrong shape");
        const Eigen::Index nm = n_ * m_;
        Vector<T> b(nm + m_ * m_);
        for (Eigen::Index c = 0; c < m_; ++c) {
            b.segment(c * n_, n_) = rhs.col(c);
            b.segment(nm + c * m_, m_) = g.col(c);
        }
        const Vector<T> x = lu_.solve(b);
        SylvesterSolution<T> out;
        out.V.resize(n_, m_);
        Matrix<T> lambda(m_, m_);
        for (Eigen::Index c = 0; c < m_; ++c) {
            out.V.col(c) = x.segment(c * n_, n_);
            lambda.col(c) = x.segment(nm + c * m_, m_);
        }
        const Matrix<T> resid = L0_ * out.V - out.V * A0_ - rhs;
        out.residual = max_abs(resid);
        out.multiplier = max_abs(lambda);
        const double scale = 1.0 + max_abs(rhs) + l0_scale_ * max_abs(out.V);
        if constexpr (ScalarTraits<T>::exact) {
            if (!is_exactly_zero(resid) || !is_exactly_zero(lambda))
                fail(ErrorKind::SylvesterInconsistent, "right-hand side is inconsistent with the centre constraint");
        } else {
            if (!(out.residual <= tol_ * scale) || !(out.multiplier <= tol_ * scale))
                fail(ErrorKind::SylvesterInconsistent,
                     "constrained solve residual " + ScalarTraits<double>::format(out.residual) + ", multiplier " +
                         ScalarTraits<double>::format(out.multiplier) + " exceed tolerance");
        }
        return out;
    }

private:
    Matrix<T> L0_;
    Matrix<T> A0_;
    Eigen::Index n_;
    Eigen::Index m_;
    double tol_;
    double l0_scale_;
    Eigen::PartialPivLU<Matrix<T>> lu_;
};

/// One-shot convenience around ConstrainedSylvesterSolver.
template <class T>
Matrix<T> solve_constrained_sylvester(const Matrix<T>& L0, const Matrix<T>& A0, const Matrix<T>& V0,
                                      const Matrix<T>& Z0, const Matrix<T>& rhs, double tol = 1e-10)
{
    return ConstrainedSylvesterSolver<T>(L0, A0, V0, Z0, tol).solve(rhs).V;
}

} // namespace slowvary
