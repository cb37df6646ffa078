#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slowvary/error.hpp"
#include "slowvary/linalg.hpp"
#include "slowvary/multiindex.hpp"

namespace slowvary {

/// Finite family {L_k} of cross-section operators for the linear system
///   du/dt = sum_k L_k d^k u / dx^k,
/// keyed by the derivative multi-index k. Each L_k is a dense dimU x dimU
/// matrix. Immutable once built.
template <class T>
class OperatorFamily {
public:
    using OperatorMap = std::map<MultiIndex, Matrix<T>>;

    OperatorFamily() = default;

    OperatorFamily(int dims, int dim_u, OperatorMap ops, std::vector<std::string> labels = {})
        : dims_(dims), dim_u_(dim_u), ops_(std::move(ops)), labels_(std::move(labels))
    {
        if (dims < 1)
            fail(ErrorKind::InvalidArgument, "operator family needs M >= 1");
        if (dim_u < 1)
            fail(ErrorKind::InvalidArgument, "operator family needs dimU >= 1");
        for (const auto& [k, op] : ops_) {
            if (k.dims() != dims)
                fail(ErrorKind::InvalidArgument, "operator key " + k.str() + " has wrong dimension count");
            if (op.rows() != dim_u || op.cols() != dim_u)
                fail(ErrorKind::InvalidArgument, "operator " + k.str() + " is not dimU x dimU");
        }
        if (!labels_.empty() && static_cast<int>(labels_.size()) != dim_u)
            fail(ErrorKind::InvalidArgument, "label count must equal dimU");
    }

    int dims() const noexcept { return dims_; }
    int dim_u() const noexcept { return dim_u_; }
    const OperatorMap& operators() const noexcept { return ops_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    bool contains(const MultiIndex& k) const { return ops_.count(k) != 0; }

    const Matrix<T>* find(const MultiIndex& k) const
    {
        auto it = ops_.find(k);
        return it == ops_.end() ? nullptr : &it->second;
    }

    const Matrix<T>& at(const MultiIndex& k) const
    {
        auto it = ops_.find(k);
        if (it == ops_.end())
            fail(ErrorKind::InvalidArgument, "no operator with key " + k.str());
        return it->second;
    }

    /// L_0; throws MissingBaseOperator when absent.
    const Matrix<T>& base() const
    {
        auto it = ops_.find(MultiIndex::zero(dims_));
        if (it == ops_.end())
            fail(ErrorKind::MissingBaseOperator, "family has no operator for key " + MultiIndex::zero(dims_).str());
        return it->second;
    }

    std::vector<MultiIndex> support() const
    {
        std::vector<MultiIndex> out;
        for (const auto& entry : ops_)
            out.push_back(entry.first);
        return out;
    }

    int max_order() const
    {
        int out = 0;
        for (const auto& entry : ops_)
            out = std::max(out, entry.first.order());
        return out;
    }

    OperatorFamily<double> to_double() const
    {
        typename OperatorFamily<double>::OperatorMap out;
        for (const auto& [k, op] : ops_)
            out.emplace(k, slowvary::to_double(op));
        return OperatorFamily<double>(dims_, dim_u_, std::move(out), labels_);
    }

private:
    int dims_ = 0;
    int dim_u_ = 0;
    OperatorMap ops_;
    std::vector<std::string> labels_;
};

} // namespace slowvary
