#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "slowvary/error.hpp"

namespace slowvary {

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out))
        fail(ErrorKind::Overflow, "integer overflow in multi-index combinatorics");
    return out;
}

/// C(n, k) with exact intermediate division; throws on overflow.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // c * (n - k + i) / i is exact at every step; divide by the gcd first
        // so the product only overflows when the result does.
        const std::uint64_t num = n - k + i;
        const std::uint64_t g = std::gcd(c, i);
        c = checked_mul(c / g, num / (i / g));
    }
    return c;
}

} // namespace detail

/// Vector of M non-negative integer exponents. Comparison is graded
/// lexicographic: lower total order first, then larger leading entries first,
/// so (0,0) < (1,0) < (0,1) < (2,0) < (1,1) < (0,2).
class MultiIndex {
public:
    MultiIndex() = default;

    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries))
    {
        for (int e : entries_)
            if (e < 0)
                fail(ErrorKind::InvalidArgument, "multi-index entries must be non-negative");
    }

    MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

    static MultiIndex zero(int dims) { return MultiIndex(std::vector<int>(static_cast<size_t>(dims), 0)); }

    static MultiIndex unit(int dims, int axis)
    {
        MultiIndex m = zero(dims);
        m.entries_.at(static_cast<size_t>(axis)) = 1;
        return m;
    }

    int dims() const noexcept { return static_cast<int>(entries_.size()); }
    int operator[](int i) const { return entries_[static_cast<size_t>(i)]; }
    const std::vector<int>& entries() const noexcept { return entries_; }

    int order() const noexcept { return std::accumulate(entries_.begin(), entries_.end(), 0); }
    bool is_zero() const noexcept { return order() == 0; }

    /// n! = n_1! n_2! ... n_M!
    std::uint64_t factorial() const
    {
        std::uint64_t f = 1;
        for (int e : entries_)
            for (int j = 2; j <= e; ++j)
                f = detail::checked_mul(f, static_cast<std::uint64_t>(j));
        return f;
    }

    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b)
    {
        require_same_dims(a, b);
        std::vector<int> out(a.entries_);
        for (size_t i = 0; i < out.size(); ++i)
            out[i] += b.entries_[i];
        return MultiIndex(std::move(out));
    }

    /// Componentwise difference; requires b <= a componentwise.
    friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b)
    {
        require_same_dims(a, b);
        std::vector<int> out(a.entries_);
        for (size_t i = 0; i < out.size(); ++i) {
            out[i] -= b.entries_[i];
            if (out[i] < 0)
                fail(ErrorKind::InvalidArgument, "multi-index difference would be negative");
        }
        return MultiIndex(std::move(out));
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

    friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b)
    {
        if (auto c = a.order() <=> b.order(); c != 0)
            return c;
        if (auto c = a.dims() <=> b.dims(); c != 0)
            return c;
        for (size_t i = 0; i < a.entries_.size(); ++i)
            if (a.entries_[i] != b.entries_[i])
                return b.entries_[i] <=> a.entries_[i];
        return std::strong_ordering::equal;
    }

    /// Comma-joined serialisation "k1,k2,...,kM".
    std::string str() const
    {
        std::string s;
        for (size_t i = 0; i < entries_.size(); ++i) {
            if (i)
                s += ',';
            s += std::to_string(entries_[i]);
        }
        return s;
    }

    static MultiIndex parse(std::string_view text)
    {
        std::vector<int> out;
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t comma = text.find(',', pos);
            if (comma == std::string_view::npos)
                comma = text.size();
            std::string_view tok = text.substr(pos, comma - pos);
            while (!tok.empty() && tok.front() == ' ')
                tok.remove_prefix(1);
            while (!tok.empty() && tok.back() == ' ')
                tok.remove_suffix(1);
            int v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
                fail(ErrorKind::Parse, "malformed multi-index '" + std::string(text) + "'");
            out.push_back(v);
            pos = comma + 1;
        }
        return MultiIndex(std::move(out));
    }

private:
    static void require_same_dims(const MultiIndex& a, const MultiIndex& b)
    {
        if (a.dims() != b.dims())
            fail(ErrorKind::InvalidArgument, "multi-index dimension mismatch");
    }

    std::vector<int> entries_;
};

/// a_i <= b_i for every component.
inline bool partial_leq(const MultiIndex& a, const MultiIndex& b)
{
    if (a.dims() != b.dims())
        fail(ErrorKind::InvalidArgument, "multi-index dimension mismatch");
    for (int i = 0; i < a.dims(); ++i)
        if (a[i] > b[i])
            return false;
    return true;
}

/// prod_i C(a_i, b_i); zero when some b_i > a_i.
inline std::uint64_t multi_binomial(const MultiIndex& a, const MultiIndex& b)
{
    if (a.dims() != b.dims())
        fail(ErrorKind::InvalidArgument, "multi-index dimension mismatch");
    std::uint64_t out = 1;
    for (int i = 0; i < a.dims(); ++i) {
        if (b[i] > a[i])
            return 0;
        out = detail::checked_mul(out, detail::binomial(static_cast<std::uint64_t>(a[i]),
                                                        static_cast<std::uint64_t>(b[i])));
    }
    return out;
}

/// Number of multi-indices in M dimensions with |n| <= N, i.e. C(N+M, M).
inline std::uint64_t index_count(int dims, int order)
{
    if (dims < 1 || order < 0)
        fail(ErrorKind::InvalidArgument, "index_count requires M >= 1 and N >= 0");
    return detail::binomial(static_cast<std::uint64_t>(order) + static_cast<std::uint64_t>(dims),
                            static_cast<std::uint64_t>(dims));
}

/// All multi-indices with |n| <= N in graded-lex order, plus reverse lookup.
class IndexTable {
public:
    IndexTable() = default;

    IndexTable(int dims, int order) : dims_(dims), order_(order)
    {
        const auto count = index_count(dims, order);
        indices_.reserve(static_cast<size_t>(count));
        std::vector<int> work(static_cast<size_t>(dims), 0);
        for (int grade = 0; grade <= order; ++grade)
            fill_grade(work, 0, grade);
        for (size_t i = 0; i < indices_.size(); ++i)
            position_.emplace(indices_[i], i);
    }

    int dims() const noexcept { return dims_; }
    int order() const noexcept { return order_; }
    size_t size() const noexcept { return indices_.size(); }
    const MultiIndex& operator[](size_t i) const { return indices_[i]; }
    const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }

    bool contains(const MultiIndex& n) const { return position_.count(n) != 0; }

    size_t position(const MultiIndex& n) const
    {
        auto it = position_.find(n);
        if (it == position_.end())
            fail(ErrorKind::InvalidArgument, "multi-index " + n.str() + " not in table");
        return it->second;
    }

    /// Indices with |n| == grade, in table order.
    std::vector<MultiIndex> grade(int g) const
    {
        std::vector<MultiIndex> out;
        for (const auto& n : indices_)
            if (n.order() == g)
                out.push_back(n);
        return out;
    }

private:
    void fill_grade(std::vector<int>& work, size_t slot, int remaining)
    {
        if (slot + 1 == work.size()) {
            work[slot] = remaining;
            indices_.emplace_back(work);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            work[slot] = v;
            fill_grade(work, slot + 1, remaining - v);
        }
        work[slot] = 0;
    }

    int dims_ = 0;
    int order_ = 0;
    std::vector<MultiIndex> indices_;
    std::map<MultiIndex, size_t> position_;
};

inline IndexTable enumerate_indices(int dims, int order)
{
    if (dims < 1 || order < 0)
        fail(ErrorKind::InvalidArgument, "enumerate_indices requires M >= 1 and N >= 0");
    return IndexTable(dims, order);
}

} // namespace slowvary

template <>
struct std::hash<slowvary::MultiIndex> {
    size_t operator()(const slowvary::MultiIndex& n) const noexcept
    {
        size_t h = 0xcbf29ce484222325ull;
        for (int e : n.entries())
            h = (h ^ static_cast<size_t>(e)) * 0x100000001b3ull;
        return h;
    }
};
