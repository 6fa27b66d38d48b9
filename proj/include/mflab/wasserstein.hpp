#pragma once

#include <cstddef>
#include <vector>

#include "mflab/ensemble.hpp"

namespace mflab {

/// Row-major |P| x |Q| matrix of ground costs |x - x'| + ||lambda - lambda'||_BL.
/// OpenMP-parallel over rows.
std::vector<double> ground_cost_matrix(const EmpiricalMeasure& P, const EmpiricalMeasure& Q);
/// Serial reference for ground_cost_matrix; results are bit-identical.
std::vector<double> ground_cost_matrix_serial(const EmpiricalMeasure& P, const EmpiricalMeasure& Q);

/// Exact W1 between two uniform empirical measures on the state space.
/// Equal sizes reduce to an assignment problem; unequal sizes are solved as
/// an assignment on lcm(|P|, |Q|) replicated atoms when that stays small and
/// as a transport linear program otherwise.
double w1_product(const EmpiricalMeasure& P, const EmpiricalMeasure& Q);

/// Transport-LP route for W1 between uniform empirical measures (any sizes).
double w1_product_lp(const EmpiricalMeasure& P, const EmpiricalMeasure& Q);

}  // namespace mflab
