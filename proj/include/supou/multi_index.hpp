#pragma once

#include <compare>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace supou {

/// Multi-index p = (p_1,...,p_d) of non-negative integers; labels one tensor Hermite
/// eigenfunction. Ordered lexicographically so coefficient maps iterate deterministically.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) { check(); }
    MultiIndex(std::initializer_list<int> entries) : entries_(entries) { check(); }

    static MultiIndex zero(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }

    int dim() const { return static_cast<int>(entries_.size()); }
    int degree() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }
    int operator[](int axis) const { return entries_[axis]; }
    const std::vector<int>& entries() const { return entries_; }

    auto operator<=>(const MultiIndex&) const = default;

private:
    void check() const {
        if (entries_.empty()) throw std::invalid_argument("MultiIndex: empty");
        for (int e : entries_)
            if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
    }

    std::vector<int> entries_;
};

/// All multi-indices of dimension dim with degree() <= max_degree, in graded
/// lexicographic order. index_of() is the inverse map; checkpoint files store
/// eigen-functionals in exactly this order.
class MultiIndexSet {
public:
    MultiIndexSet(int dim, int max_degree);

    int size() const { return static_cast<int>(indices_.size()); }
    const MultiIndex& operator[](int i) const { return indices_[i]; }
    const std::vector<MultiIndex>& all() const { return indices_; }
    int max_degree() const { return max_degree_; }
    int dim() const { return dim_; }

    /// Position of p in the enumeration; throws if p is out of range.
    int index_of(const MultiIndex& p) const;

private:
    int dim_;
    int max_degree_;
    std::vector<MultiIndex> indices_;
};

} // namespace supou
