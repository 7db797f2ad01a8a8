#include "supou/multi_index.hpp"

#include <algorithm>

namespace supou {

namespace {
void enumerate(int dim, int axis, int remaining, std::vector<int>& scratch,
               std::vector<MultiIndex>& out) {
    if (axis == dim - 1) {
        scratch[axis] = remaining;
        out.emplace_back(scratch);
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        scratch[axis] = k;
        enumerate(dim, axis + 1, remaining - k, scratch, out);
    }
}
} // namespace

MultiIndexSet::MultiIndexSet(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
    if (dim < 1) throw std::invalid_argument("MultiIndexSet: dim must be >= 1");
    if (max_degree < 0) throw std::invalid_argument("MultiIndexSet: negative degree cap");
    std::vector<int> scratch(dim, 0);
    for (int deg = 0; deg <= max_degree; ++deg) enumerate(dim, 0, deg, scratch, indices_);
}

int MultiIndexSet::index_of(const MultiIndex& p) const {
    if (p.dim() != dim_ || p.degree() > max_degree_)
        throw std::out_of_range("MultiIndexSet: index outside enumerated set");
    // Indices are grouped by degree; within a degree the enumeration order is fixed.
    const auto it = std::find(indices_.begin(), indices_.end(), p);
    if (it == indices_.end()) throw std::out_of_range("MultiIndexSet: index not found");
    return static_cast<int>(it - indices_.begin());
}

} // namespace supou
