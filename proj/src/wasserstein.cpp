#include "mflab/wasserstein.hpp"

#include <numeric>

#include "mflab/assignment.hpp"
#include "mflab/errors.hpp"
#include "mflab/lp.hpp"

namespace mflab {
namespace {

constexpr std::size_t kMaxReplicatedSize = 2400;

void require_compatible(const EmpiricalMeasure& P, const EmpiricalMeasure& Q) {
  if (!P.same_layout(Q)) throw UsageError("w1_product: measures differ in dimension or label space");
  if (P.size() == 0 || Q.size() == 0) throw UsageError("w1_product: empty measure");
}

void cost_row(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, std::size_t i, double* row) {
  const LabelSpace& space = *P.space();
  const AgentRef a = P.agent(i);
  for (std::size_t j = 0; j < Q.size(); ++j) row[j] = energy_distance(space, a, Q.agent(j));
}

}  // namespace

std::vector<double> ground_cost_matrix(const EmpiricalMeasure& P, const EmpiricalMeasure& Q) {
  require_compatible(P, Q);
  const std::size_t n = P.size(), m = Q.size();
  std::vector<double> cost(n * m);
  const long long rows = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < rows; ++i) cost_row(P, Q, static_cast<std::size_t>(i), cost.data() + i * m);
  return cost;
}

std::vector<double> ground_cost_matrix_serial(const EmpiricalMeasure& P, const EmpiricalMeasure& Q) {
  require_compatible(P, Q);
  const std::size_t n = P.size(), m = Q.size();
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) cost_row(P, Q, i, cost.data() + i * m);
  return cost;
}

double w1_product_lp(const EmpiricalMeasure& P, const EmpiricalMeasure& Q) {
  require_compatible(P, Q);
  const std::size_t n = P.size(), m = Q.size();
  const std::vector<double> cost = ground_cost_matrix(P, Q);
  lp::Program p;
  p.n_vars = n * m;
  p.objective.resize(n * m);
  for (std::size_t k = 0; k < n * m; ++k) p.objective[k] = -cost[k];
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) row[i * m + j] = 1.0;
    p.add(std::move(row), lp::Relation::Equal, 1.0 / static_cast<double>(n));
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> row(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) row[i * m + j] = 1.0;
    p.add(std::move(row), lp::Relation::Equal, 1.0 / static_cast<double>(m));
  }
  const lp::Result r = lp::solve(p);
  if (r.status != lp::Status::Optimal) throw InternalError("product transport program not solved");
  return std::max(0.0, -r.value);
}

double w1_product(const EmpiricalMeasure& P, const EmpiricalMeasure& Q) {
  require_compatible(P, Q);
  const std::size_t n = P.size(), m = Q.size();
  if (n == m) {
    const std::vector<double> cost = ground_cost_matrix(P, Q);
    return min_cost_assignment(cost, n) / static_cast<double>(n);
  }
  const std::size_t l = std::lcm(n, m);
  if (l > kMaxReplicatedSize) return w1_product_lp(P, Q);

  // Uniform weights 1/n and 1/m become l atoms of weight 1/l each.
  const std::vector<double> base = ground_cost_matrix(P, Q);
  const std::size_t rp = l / n, rq = l / m;
  std::vector<double> cost(l * l);
  for (std::size_t a = 0; a < l; ++a) {
    const double* src = base.data() + (a / rp) * m;
    double* dst = cost.data() + a * l;
    for (std::size_t b = 0; b < l; ++b) dst[b] = src[b / rq];
  }
  return min_cost_assignment(cost, l) / static_cast<double>(l);
}

}  // namespace mflab
