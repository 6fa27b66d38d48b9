#include "mflab/ensemble.hpp"

#include <cmath>

#include "mflab/errors.hpp"

namespace mflab {

EmpiricalMeasure::EmpiricalMeasure(LabelSpacePtr space, std::size_t dim, std::vector<double> x,
                                   std::vector<double> lambda)
    : space_(std::move(space)), d_(dim), x_(std::move(x)), lambda_(std::move(lambda)) {
  if (!space_) throw UsageError("empirical measure needs a label space");
  if (d_ == 0) throw UsageError("empirical measure needs spatial dimension >= 1");
  if (x_.size() % d_ != 0) throw UsageError("position array is not a multiple of the dimension");
  n_ = x_.size() / d_;
  if (lambda_.size() != n_ * space_->size()) throw UsageError("label array does not match agent count");
  for (double v : x_)
    if (!std::isfinite(v)) throw InvariantError("non-finite agent position");
  for (double v : lambda_)
    if (!std::isfinite(v)) throw InvariantError("non-finite label weight");
}

EmpiricalMeasure EmpiricalMeasure::from_agents(const std::vector<AgentState>& agents) {
  if (agents.empty()) throw UsageError("empirical measure needs at least one agent");
  const auto& space = agents.front().lambda.space();
  const std::size_t d = agents.front().x.size();
  std::vector<double> x, lambda;
  x.reserve(agents.size() * d);
  lambda.reserve(agents.size() * space->size());
  for (const auto& a : agents) {
    if (a.x.size() != d || a.lambda.space() != space)
      throw UsageError("agents differ in dimension or label space");
    x.insert(x.end(), a.x.begin(), a.x.end());
    lambda.insert(lambda.end(), a.lambda.weights().begin(), a.lambda.weights().end());
  }
  return {space, d, std::move(x), std::move(lambda)};
}

EmpiricalMeasure EmpiricalMeasure::filled(LabelSpacePtr space, std::size_t n, std::size_t dim,
                                          const LabelMeasure& lambda) {
  std::vector<double> x(n * dim, 0.0), lam;
  lam.reserve(n * lambda.size());
  for (std::size_t i = 0; i < n; ++i) lam.insert(lam.end(), lambda.weights().begin(), lambda.weights().end());
  return {std::move(space), dim, std::move(x), std::move(lam)};
}

AgentState EmpiricalMeasure::state(std::size_t i) const {
  const AgentRef a = agent(i);
  return {std::vector<double>(a.x.begin(), a.x.end()),
          LabelMeasure(space_, std::vector<double>(a.lambda.begin(), a.lambda.end()))};
}

double EmpiricalMeasure::mean_position(std::size_t coord) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += x_[i * d_ + coord];
  return n_ ? s / static_cast<double>(n_) : 0.0;
}

double EmpiricalMeasure::first_moment() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += energy_norm(*space_, agent(i));
  return n_ ? s / static_cast<double>(n_) : 0.0;
}

double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double energy_norm(const LabelSpace& space, AgentRef y) {
  return euclidean_norm(y.x) + bl_norm(space, y.lambda);
}

double energy_distance(const LabelSpace& space, AgentRef a, AgentRef b) {
  double dx = 0.0;
  for (std::size_t j = 0; j < a.x.size(); ++j) dx += (a.x[j] - b.x[j]) * (a.x[j] - b.x[j]);
  const std::size_t k = a.lambda.size();
  double buf[16];
  std::vector<double> heap;
  double* diff = buf;
  if (k > 16) {
    heap.resize(k);
    diff = heap.data();
  }
  bool same = true;
  for (std::size_t j = 0; j < k; ++j) {
    diff[j] = a.lambda[j] - b.lambda[j];
    same = same && diff[j] == 0.0;
  }
  return std::sqrt(dx) + (same ? 0.0 : bl_norm(space, std::span<const double>(diff, k)));
}

}  // namespace mflab
