#pragma once

#include <cstddef>
#include <cstdint>

#include "mflab/fields.hpp"

namespace mflab {

/// Where probe samples live: agents with |x| <= max(R - 1, 0) and arbitrary
/// probability labels (so ||y||_E <= R), populations of `psi_size` such agents.
struct ProbeDomain {
  LabelSpacePtr space;
  std::size_t dim = 1;
  double radius = 2.0;
  std::size_t psi_size = 8;
};

struct LipschitzEstimate {
  double L_v = 0.0;
  double L_T = 0.0;
  double L_R() const { return L_v + L_T; }
};

struct GrowthEstimate {
  double M_v = 0.0;
  double M_T = 0.0;
};

/// Max observed difference quotients of v and T over sampled pairs. Sample j
/// only depends on (seed, j), so the estimate never decreases as n_samples grows.
LipschitzEstimate probe_lipschitz(const FieldPair& fp, const ProbeDomain& dom, std::size_t n_samples,
                                  std::uint64_t seed);

/// max |v_Psi(y)| / (1 + ||y||_E + m1(Psi)) and ||T_Psi(y)||_BL / (1 + |x| + m1(Psi)).
GrowthEstimate probe_growth(const FieldPair& fp, const ProbeDomain& dom, std::size_t n_samples,
                            std::uint64_t seed);

/// Positivity margin estimate: twice the max of -T_k / lambda_k over sampled
/// states and atoms with lambda_k >= 1e-6.
double probe_delta(const FieldPair& fp, const ProbeDomain& dom, std::size_t n_samples, std::uint64_t seed);

/// Closed-form margin when the field provides one, the probe otherwise.
double positivity_margin(const FieldPair& fp, const ProbeDomain& dom, std::uint64_t seed,
                         std::size_t n_samples = 256);

}  // namespace mflab
