#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mflab {

/// Minimum-cost perfect matching on a dense n x n cost matrix (row-major).
/// Returns the total cost; if `row_to_col` is non-null it receives the
/// optimal permutation. O(n^3) shortest augmenting path with potentials.
double min_cost_assignment(std::span<const double> cost, std::size_t n,
                           std::vector<std::size_t>* row_to_col = nullptr);

}  // namespace mflab
