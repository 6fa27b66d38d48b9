#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mflab/measures.hpp"

namespace mflab {

/// Non-owning view of one agent: position x in R^d and label weights.
struct AgentRef {
  std::span<const double> x;
  std::span<const double> lambda;
};

/// Owning agent state y = (x, lambda).
struct AgentState {
  std::vector<double> x;
  LabelMeasure lambda;

  AgentRef ref() const { return {x, lambda.weights()}; }
};

/// Uniform-weight empirical measure over N agents sharing the spatial
/// dimension and label space. Storage is structure-of-arrays so that the
/// per-agent kernels stream through contiguous memory.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(LabelSpacePtr space, std::size_t dim, std::vector<double> x,
                   std::vector<double> lambda);
  static EmpiricalMeasure from_agents(const std::vector<AgentState>& agents);
  /// N agents at the origin with the given label measure.
  static EmpiricalMeasure filled(LabelSpacePtr space, std::size_t n, std::size_t dim,
                                 const LabelMeasure& lambda);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  std::size_t n_labels() const { return space_ ? space_->size() : 0; }
  const LabelSpacePtr& space() const { return space_; }

  AgentRef agent(std::size_t i) const {
    return {std::span<const double>(x_).subspan(i * d_, d_),
            std::span<const double>(lambda_).subspan(i * n_labels(), n_labels())};
  }
  std::span<double> x_of(std::size_t i) { return std::span<double>(x_).subspan(i * d_, d_); }
  std::span<double> lambda_of(std::size_t i) {
    return std::span<double>(lambda_).subspan(i * n_labels(), n_labels());
  }
  AgentState state(std::size_t i) const;

  std::span<const double> positions() const { return x_; }
  std::span<const double> labels() const { return lambda_; }
  std::span<double> positions() { return x_; }
  std::span<double> labels() { return lambda_; }

  /// (1/N) sum_i x_i[coord].
  double mean_position(std::size_t coord = 0) const;
  /// m1 = (1/N) sum_i (|x_i| + ||lambda_i||_BL).
  double first_moment() const;

  bool same_layout(const EmpiricalMeasure& o) const {
    return d_ == o.d_ && space_ == o.space_;
  }

 private:
  LabelSpacePtr space_;
  std::size_t n_ = 0, d_ = 0;
  std::vector<double> x_;
  std::vector<double> lambda_;
};

double euclidean_norm(std::span<const double> x);

/// ||y||_E = |x| + ||lambda||_BL.
double energy_norm(const LabelSpace& space, AgentRef y);
/// ||y1 - y2||_E = |x1 - x2| + ||lambda1 - lambda2||_BL.
double energy_distance(const LabelSpace& space, AgentRef a, AgentRef b);

}  // namespace mflab
