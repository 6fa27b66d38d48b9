#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mflab/label_space.hpp"
#include "mflab/lp.hpp"

namespace mflab {

/// Tolerance on the total mass of probability and zero-mass measures.
inline constexpr double kMassTol = 1e-12;

/// Weight vector over the atoms of a label space. The same type carries
/// probability measures, signed measures and zero-mass measures; the
/// factory functions establish the stronger invariants.
class LabelMeasure {
 public:
  LabelMeasure() = default;
  LabelMeasure(LabelSpacePtr space, std::vector<double> weights);

  /// Validates and repairs a probability vector: entries in [-1e-12, 0) are
  /// clamped and the vector renormalized; anything worse throws.
  static LabelMeasure probability(LabelSpacePtr space, std::vector<double> weights);
  static LabelMeasure dirac(LabelSpacePtr space, std::size_t atom);
  static LabelMeasure uniform(LabelSpacePtr space);
  static LabelMeasure zero(LabelSpacePtr space);

  const LabelSpacePtr& space() const { return space_; }
  std::span<const double> weights() const { return w_; }
  std::span<double> weights() { return w_; }
  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }

  double total_mass() const;
  bool is_probability(double tol = kMassTol) const;
  bool is_zero_mass(double tol = kMassTol) const;

  /// Pairing <mu, coord>, the mean label value.
  double mean_coord() const;

  LabelMeasure& operator+=(const LabelMeasure& o);
  LabelMeasure& operator-=(const LabelMeasure& o);
  LabelMeasure& operator*=(double s);

 private:
  LabelSpacePtr space_;
  std::vector<double> w_;
};

LabelMeasure operator+(LabelMeasure a, const LabelMeasure& b);
LabelMeasure operator-(LabelMeasure a, const LabelMeasure& b);
LabelMeasure operator*(double s, LabelMeasure a);

/// Clamp-and-renormalize repair for probability weights in place.
void repair_probability(std::span<double> w, double tol = kMassTol);

double tv_norm(const LabelMeasure& sigma);
double tv_norm(std::span<const double> w);

/// Bounded-Lipschitz dual norm: sup <sigma, phi> over |phi| <= 1 and
/// |phi(u) - phi(v)| <= d(u, v). Solved as a linear program over the values
/// of phi at the atoms; closed forms are used for one-signed measures and
/// for zero-mass measures on line metrics of diameter <= 2.
double bl_norm(const LabelMeasure& sigma);
double bl_norm(const LabelSpace& space, std::span<const double> w);

/// LP-only route for the BL norm, without the closed-form shortcuts.
double bl_norm_lp(const LabelSpace& space, std::span<const double> w);

/// Exact Wasserstein-1 distance between probability measures on the same
/// label space via the primal transport program.
double w1_labels(const LabelMeasure& mu1, const LabelMeasure& mu2);

/// (1 - rho) lambda + rho g.
LabelMeasure relax_toward(const LabelMeasure& lambda, const LabelMeasure& g, double rho);
void relax_toward(std::span<const double> lambda, std::span<const double> g, double rho,
                  std::span<double> out);

/// Prebuilt constraint set for the BL program of one label space. Each call
/// copies the program and only swaps the objective, so concurrent calls are
/// safe.
class BlNormEvaluator {
 public:
  explicit BlNormEvaluator(const LabelSpace& space);
  double operator()(std::span<const double> w) const;

 private:
  lp::Program program_;
};

}  // namespace mflab
