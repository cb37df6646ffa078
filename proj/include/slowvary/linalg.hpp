#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "slowvary/error.hpp"
#include "slowvary/rational.hpp"

namespace slowvary {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using MatrixXc = Matrix<std::complex<double>>;
using VectorXd = Vector<double>;
using VectorXc = Vector<std::complex<double>>;

/// Per-scalar hooks so the reduction templates run identically in double
/// precision and in exact rational arithmetic.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static constexpr std::string_view name = "double";

    static double to_double(double v) { return v; }
    static double from_rational(const Rational& r) { return r.to_double(); }
    static double parse(std::string_view text) { return Rational::parse(text).to_double(); }
    static double ratio(long num, long den) { return static_cast<double>(num) / static_cast<double>(den); }

    /// Shortest round-trip decimal.
    static std::string format(double v)
    {
        std::array<char, 64> buf{};
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        if (ec != std::errc())
            return std::to_string(v);
        return std::string(buf.data(), ptr);
    }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static constexpr std::string_view name = "rational";

    static double to_double(const Rational& v) { return v.to_double(); }
    static Rational from_rational(const Rational& r) { return r; }
    static Rational parse(std::string_view text) { return Rational::parse(text); }
    static Rational ratio(long num, long den) { return Rational(num, den); }
    static std::string format(const Rational& v) { return v.str(); }
};

template <class T>
T scalar_ratio(long num, long den)
{
    return ScalarTraits<T>::ratio(num, den);
}

template <class Derived>
MatrixXd to_double(const Eigen::MatrixBase<Derived>& m)
{
    using T = typename Derived::Scalar;
    MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out(i, j) = ScalarTraits<T>::to_double(m(i, j));
    return out;
}

/// Largest absolute entry, as a double (exactly zero stays zero).
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m)
{
    using T = typename Derived::Scalar;
    double out = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out = std::max(out, std::abs(ScalarTraits<T>::to_double(m(i, j))));
    return out;
}

template <class Derived>
bool is_exactly_zero(const Eigen::MatrixBase<Derived>& m)
{
    using T = typename Derived::Scalar;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!(m(i, j) == T(0)))
                return false;
    return true;
}

inline Matrix<Rational> to_rational(const MatrixXd& m)
{
    Matrix<Rational> out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out(i, j) = Rational::from_double(m(i, j));
    return out;
}

/// Exact basis of the right null space via reduced row echelon form. Each
/// basis column has a 1 in its free-variable slot. Intended for Rational;
/// with doubles it compares pivots against exact zero and is unreliable.
template <class T>
Matrix<T> exact_nullspace(Matrix<T> a)
{
    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    std::vector<Eigen::Index> pivot_cols;
    Eigen::Index r = 0;
    for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
        Eigen::Index p = r;
        while (p < rows && a(p, c) == T(0))
            ++p;
        if (p == rows)
            continue;
        a.row(p).swap(a.row(r));
        const T inv = T(1) / a(r, c);
        a.row(r) *= inv;
        for (Eigen::Index i = 0; i < rows; ++i)
            if (i != r && !(a(i, c) == T(0))) {
                const T f = a(i, c);
                a.row(i) -= f * a.row(r);
            }
        pivot_cols.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(static_cast<size_t>(cols), false);
    for (auto c : pivot_cols)
        is_pivot[static_cast<size_t>(c)] = true;
    std::vector<Eigen::Index> free_cols;
    for (Eigen::Index c = 0; c < cols; ++c)
        if (!is_pivot[static_cast<size_t>(c)])
            free_cols.push_back(c);
    Matrix<T> basis = Matrix<T>::Zero(cols, static_cast<Eigen::Index>(free_cols.size()));
    for (size_t k = 0; k < free_cols.size(); ++k) {
        const Eigen::Index f = free_cols[k];
        basis(f, static_cast<Eigen::Index>(k)) = T(1);
        for (size_t pi = 0; pi < pivot_cols.size(); ++pi)
            basis(pivot_cols[pi], static_cast<Eigen::Index>(k)) = -a(static_cast<Eigen::Index>(pi), f);
    }
    return basis;
}

/// Inverse of a small square matrix; exact for Rational.
template <class T>
Matrix<T> small_inverse(const Matrix<T>& a)
{
    if constexpr (ScalarTraits<T>::exact) {
        return a.fullPivLu().inverse();
    } else {
        return a.partialPivLu().inverse();
    }
}

} // namespace slowvary
