#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowvary/error.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/models.hpp"
#include "slowvary/multiindex.hpp"
#include "slowvary/operator_family.hpp"
#include "slowvary/reduction.hpp"
#include "slowvary/simulate.hpp"

namespace slowvary::io {

using json = nlohmann::ordered_json;

/// Doubles as JSON numbers; non-finite values become null.
inline json number(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return v;
}

template <class T>
json scalar_to_json(const T& v)
{
    if constexpr (ScalarTraits<T>::exact)
        return v.str();
    else
        return number(v);
}

template <class T>
json matrix_to_json(const Matrix<T>& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(scalar_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Numbers or numeric strings ("8/27", "-0.125", "1e-3").
inline double scalar_from_json(const json& v)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
        return Rational::parse(v.get<std::string>()).to_double();
    fail(ErrorKind::Parse, "expected a number or numeric string, got " + v.dump());
}

inline MatrixXd matrix_from_json(const json& rows, Eigen::Index expect_rows = -1, Eigen::Index expect_cols = -1)
{
    if (!rows.is_array() || rows.empty())
        fail(ErrorKind::Parse, "matrix must be a non-empty array of rows");
    const auto r = static_cast<Eigen::Index>(rows.size());
    if (!rows[0].is_array())
        fail(ErrorKind::Parse, "matrix rows must be arrays");
    const auto c = static_cast<Eigen::Index>(rows[0].size());
    if ((expect_rows >= 0 && r != expect_rows) || (expect_cols >= 0 && c != expect_cols))
        fail(ErrorKind::Parse, "matrix has shape " + std::to_string(r) + "x" + std::to_string(c) + ", expected " +
                                   std::to_string(expect_rows) + "x" + std::to_string(expect_cols));
    MatrixXd out(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
            fail(ErrorKind::Parse, "ragged matrix row " + std::to_string(i));
        for (Eigen::Index j = 0; j < c; ++j)
            out(i, j) = scalar_from_json(row[static_cast<size_t>(j)]);
    }
    return out;
}

inline json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out)
        fail(ErrorKind::Io, "write failed for " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const json& j)
{
    write_text_file(path, j.dump(2) + "\n");
}

// ---- model specs -----------------------------------------------------------

/// { "M": int, "dimU": int, "operators": { "k1,k2": [[...]], ... }, "labels": [...] }
inline OperatorFamily<double> family_from_json(const json& j)
{
    try {
        if (!j.contains("M") || !j.contains("dimU") || !j.contains("operators"))
            fail(ErrorKind::Parse, "model spec needs \"M\", \"dimU\" and \"operators\"");
        const int dims = j.at("M").get<int>();
        const int dim_u = j.at("dimU").get<int>();
        if (dims < 1 || dim_u < 1)
            fail(ErrorKind::Parse, "M and dimU must be positive");
        OperatorFamily<double>::OperatorMap ops;
        for (const auto& [key, value] : j.at("operators").items()) {
            MultiIndex k = MultiIndex::parse(key);
            if (k.dims() != dims)
                fail(ErrorKind::Parse, "operator key \"" + key + "\" does not have M entries");
            if (!ops.emplace(k, matrix_from_json(value, dim_u, dim_u)).second)
                fail(ErrorKind::Parse, "duplicate operator key \"" + key + "\"");
        }
        std::vector<std::string> labels;
        if (j.contains("labels"))
            labels = j.at("labels").get<std::vector<std::string>>();
        return OperatorFamily<double>(dims, dim_u, std::move(ops), std::move(labels));
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("model spec: ") + e.what());
    }
}

template <class T>
json family_to_json(const OperatorFamily<T>& fam)
{
    json j;
    j["M"] = fam.dims();
    j["dimU"] = fam.dim_u();
    json ops = json::object();
    for (const auto& [k, op] : fam.operators())
        ops[k.str()] = matrix_to_json(op);
    j["operators"] = std::move(ops);
    if (!fam.labels().empty())
        j["labels"] = fam.labels();
    return j;
}

/// { "h": ..., "n": ..., "K": [[...]] } or
/// { "h": ..., "n": ..., "K_expr": "layered_cos", "params": { "K0": 1, "a": 0.5 } }
inline CellProblem cell_from_json(const json& j)
{
    try {
        const double h = j.value("h", 1.0);
        if (j.contains("K_expr")) {
            std::map<std::string, double> params;
            if (j.contains("params"))
                for (const auto& [key, value] : j.at("params").items())
                    params[key] = scalar_from_json(value);
            return make_cell(j.at("K_expr").get<std::string>(), std::move(params), j.at("n").get<int>(), h);
        }
        if (!j.contains("K"))
            fail(ErrorKind::Parse, "cell problem needs \"K\" or \"K_expr\"");
        CellProblem cell;
        cell.h = h;
        cell.K = matrix_from_json(j.at("K"));
        cell.n = static_cast<int>(cell.K.rows());
        if (j.contains("n") && j.at("n").get<int>() != cell.n)
            fail(ErrorKind::Parse, "\"n\" disagrees with the K sample grid");
        validate_cell(cell);
        return cell;
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("cell problem: ") + e.what());
    }
}

inline json cell_to_json(const CellProblem& cell)
{
    json j;
    j["h"] = cell.h;
    j["n"] = cell.n;
    if (!cell.k_expr.empty()) {
        j["K_expr"] = cell.k_expr;
        json params = json::object();
        for (const auto& [k, v] : cell.params)
            params[k] = v;
        j["params"] = std::move(params);
    } else {
        j["K"] = matrix_to_json(cell.K);
    }
    return j;
}

inline bool is_cell_spec(const json& j) { return j.contains("K") || j.contains("K_expr"); }

// ---- reduction outputs -----------------------------------------------------

/// { "N": ..., "M": ..., "m": ..., "A": { "n1,n2": [[...]] } }; exact models
/// emit "p/q" strings.
template <class T>
json model_to_json(const ReducedModel<T>& model)
{
    json j;
    j["N"] = model.order;
    j["M"] = model.dims;
    j["m"] = model.m;
    j["arithmetic"] = std::string(ScalarTraits<T>::name);
    json a = json::object();
    for (const auto& [n, coeff] : model.coeffs)
        a[n.str()] = matrix_to_json(coeff);
    j["A"] = std::move(a);
    return j;
}

inline ReducedModel<double> model_from_json(const json& j)
{
    try {
        ReducedModel<double> out;
        out.order = j.at("N").get<int>();
        out.dims = j.at("M").get<int>();
        out.m = j.at("m").get<int>();
        for (const auto& [key, value] : j.at("A").items())
            out.coeffs.emplace(MultiIndex::parse(key), matrix_from_json(value, out.m, out.m));
        return out;
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("reduced model: ") + e.what());
    }
}

template <class T>
json basis_to_json(const GeneratingBasis<T>& basis, int order, int dims)
{
    json j;
    j["N"] = order;
    j["M"] = dims;
    const auto& v0 = basis.V(MultiIndex::zero(dims));
    j["dimU"] = v0.rows();
    j["m"] = v0.cols();
    json v = json::object();
    for (const auto& [n, mat] : basis.vectors)
        v[n.str()] = matrix_to_json(mat);
    j["V"] = std::move(v);
    // Monomial coefficients of the generating polynomials: xi^k -> V^{n-k}/k!.
    json poly = json::object();
    for (const auto& [n, p] : basis.poly) {
        json terms = json::object();
        for (const auto& [k, mat] : p)
            terms[k.str()] = matrix_to_json(mat);
        poly[n.str()] = std::move(terms);
    }
    j["poly"] = std::move(poly);
    return j;
}

// ---- CSV -------------------------------------------------------------------

inline std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

/// Block matrix on the Taylor state; rows and columns labelled "n1,n2|c".
template <class T>
std::string block_matrix_csv(const Matrix<T>& m, const IndexTable& table, int block)
{
    std::vector<std::string> labels;
    for (const auto& n : table)
        for (int c = 0; c < block; ++c)
            labels.push_back(n.str() + "|" + std::to_string(c));
    if (static_cast<Eigen::Index>(labels.size()) != m.rows() || m.rows() != m.cols())
        fail(ErrorKind::InvalidArgument, "matrix does not match the block layout");
    std::ostringstream os;
    os << "row";
    for (const auto& l : labels)
        os << ',' << csv_quote(l);
    os << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << csv_quote(labels[static_cast<size_t>(i)]);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << ',' << ScalarTraits<T>::format(m(i, j));
        os << '\n';
    }
    return os.str();
}

/// t, x1..xM, one column per component; one row per (sample, point).
inline std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& labels = {})
{
    std::ostringstream os;
    os << 't';
    for (int d = 0; d < traj.grid.dims(); ++d)
        os << ",x" << d + 1;
    for (int c = 0; c < traj.components(); ++c)
        os << ',' << (static_cast<size_t>(c) < labels.size() ? csv_quote(labels[static_cast<size_t>(c)]) : "u" + std::to_string(c));
    os << '\n';
    for (size_t s = 0; s < traj.frames.size(); ++s) {
        const auto& f = traj.frames[s];
        for (Eigen::Index p = 0; p < f.cols(); ++p) {
            os << ScalarTraits<double>::format(traj.times[s]);
            const auto c = traj.grid.coords(p);
            for (int d = 0; d < traj.grid.dims(); ++d)
                os << ',' << ScalarTraits<double>::format(traj.grid.coordinate(d, c[static_cast<size_t>(d)]));
            for (Eigen::Index k = 0; k < f.rows(); ++k)
                os << ',' << ScalarTraits<double>::format(f(k, p));
            os << '\n';
        }
    }
    return os.str();
}

inline std::string series_csv(const std::string& xname, const std::string& yname, const std::vector<double>& x,
                              const std::vector<double>& y)
{
    std::ostringstream os;
    os << xname << ',' << yname << '\n';
    for (size_t i = 0; i < x.size() && i < y.size(); ++i)
        os << ScalarTraits<double>::format(x[i]) << ',' << ScalarTraits<double>::format(y[i]) << '\n';
    return os.str();
}

inline std::string error_csv(const EmergenceResult& e) { return series_csv("t", "e", e.times, e.errors); }

// ---- binary frames ---------------------------------------------------------
//
// "SVTRAJ01", then little-endian: u32 M, u32 components, u32 frames,
// M x u32 sizes, M x f64 lengths; per frame f64 time followed by
// points x components f64 values (component fastest, points row-major).

inline constexpr char kFrameMagic[8] = {'S', 'V', 'T', 'R', 'A', 'J', '0', '1'};

namespace detail {

template <class U>
void put_le(std::string& out, U v)
{
    auto bits = std::bit_cast<std::array<unsigned char, sizeof(U)>>(v);
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bits.begin(), bits.end());
    out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

template <class U>
U get_le(const std::string& in, size_t& pos)
{
    if (pos + sizeof(U) > in.size())
        fail(ErrorKind::Parse, "truncated trajectory file");
    std::array<unsigned char, sizeof(U)> bits{};
    std::memcpy(bits.data(), in.data() + pos, sizeof(U));
    pos += sizeof(U);
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bits.begin(), bits.end());
    return std::bit_cast<U>(bits);
}

} // namespace detail

inline std::string trajectory_binary(const Trajectory& traj)
{
    std::string out(kFrameMagic, sizeof(kFrameMagic));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.grid.dims()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.components()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.frames.size()));
    for (int s : traj.grid.sizes)
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s));
    for (double l : traj.grid.lengths)
        detail::put_le<double>(out, l);
    for (size_t s = 0; s < traj.frames.size(); ++s) {
        detail::put_le<double>(out, traj.times[s]);
        const auto& f = traj.frames[s];
        for (Eigen::Index i = 0; i < f.size(); ++i)
            detail::put_le<double>(out, f.data()[i]);
    }
    return out;
}

inline Trajectory trajectory_from_binary(const std::string& in)
{
    if (in.size() < sizeof(kFrameMagic) || std::memcmp(in.data(), kFrameMagic, sizeof(kFrameMagic)) != 0)
        fail(ErrorKind::Parse, "not a trajectory frame file");
    size_t pos = sizeof(kFrameMagic);
    const auto dims = detail::get_le<std::uint32_t>(in, pos);
    const auto comps = detail::get_le<std::uint32_t>(in, pos);
    const auto frames = detail::get_le<std::uint32_t>(in, pos);
    std::vector<int> sizes;
    std::vector<double> lengths;
    for (std::uint32_t d = 0; d < dims; ++d)
        sizes.push_back(static_cast<int>(detail::get_le<std::uint32_t>(in, pos)));
    for (std::uint32_t d = 0; d < dims; ++d)
        lengths.push_back(detail::get_le<double>(in, pos));
    Trajectory traj;
    traj.grid = Grid(sizes, lengths);
    for (std::uint32_t s = 0; s < frames; ++s) {
        traj.times.push_back(detail::get_le<double>(in, pos));
        MatrixXd f(comps, traj.grid.points());
        for (Eigen::Index i = 0; i < f.size(); ++i)
            f.data()[i] = detail::get_le<double>(in, pos);
        traj.frames.push_back(std::move(f));
    }
    if (pos != in.size())
        fail(ErrorKind::Parse, "trailing bytes in trajectory file");
    return traj;
}

inline std::string read_binary_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace slowvary::io
