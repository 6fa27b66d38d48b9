#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mflab/initial_law.hpp"
#include "mflab/particle.hpp"
#include "mflab/probes.hpp"
#include "mflab/report.hpp"
#include "mflab/test_functions.hpp"

namespace mflab {

// ---------------------------------------------------------------- weak form

struct WeakFormResult {
  std::vector<std::string> names;
  std::vector<double> times;
  /// |r(t_k)| per test function, averaged over paths before the absolute value.
  std::vector<std::vector<double>> residual;
  std::vector<double> max_per_fn;
  double max_residual = 0;
};

/// r(t) = mean over paths of <L_t, phi> - <L_0, phi> - sum_{s<t} <L_s, Gen_{L_s} phi> dt.
/// Path p uses seed derive(cfg.seed, {kReplicate, rep, p}) for both its initial draw and noise.
WeakFormResult weak_form_residual(const SimConfig& cfg, const InitialLaw& law, const LabelSpacePtr& space,
                                  const std::vector<CylinderTestFunction>& family, std::size_t n_paths,
                                  std::uint64_t rep = 0);

// ------------------------------------------------------- mean-field limit

struct ConvergenceTable {
  std::vector<std::size_t> Ns;
  std::vector<double> t_checks;
  std::size_t n_ref = 0;
  std::size_t n_reps = 0;
  /// [rep][N index][t index]
  std::vector<std::vector<std::vector<double>>> w1;
  std::vector<std::vector<double>> mean;    // [N index][t index]
  std::vector<std::vector<double>> median;  // [N index][t index]
  std::vector<double> slope;                // log-log slope of the mean column, per t

  bool median_nonincreasing(double rel_tol = 0.0) const;
};

/// W1(L_t^N, L_t^{N_ref}) for independent initial draws from `law`; n_ref = 0
/// means the largest N. Every N must not exceed n_ref.
ConvergenceTable meanfield_convergence(const SimConfig& tmpl, const InitialLaw& law, const LabelSpacePtr& space,
                                       const std::vector<std::size_t>& Ns, const std::vector<double>& t_checks,
                                       std::size_t n_reps, std::size_t n_ref = 0);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------- stability

struct StabilityRow {
  double t = 0;
  double w1 = 0;
  double bound = 0;
};

struct StabilityResult {
  double w1_initial = 0;
  double radius = 0;
  LipschitzEstimate lipschitz;
  double C = 0;
  double theta = 0;
  std::vector<StabilityRow> rows;

  bool passed() const;
};

/// C = 1 + exp(exp(T L)) exp(T L), bound(t) = C exp(t L) W1(initial1, initial2),
/// with L = L_R_hat probed on the ball holding both trajectories.
double stability_constant(double T, double L);

/// Both systems share cfg.seed (synchronous coupling) and one theta.
StabilityResult stability_check(const SimConfig& cfg, const EmpiricalMeasure& initial1,
                                const EmpiricalMeasure& initial2, const std::vector<double>& t_checks,
                                std::size_t n_probe = 400);

// ------------------------------------------------------------------ moments

struct MomentRow {
  double t = 0;
  double x2 = 0;   // (1/N) sum |x_i|^2
  double l2 = 0;   // (1/N) sum ||lambda_i||_BL^2
  double m1 = 0;   // (1/N) sum ||y_i||_E
};

struct MomentSummary {
  std::vector<MomentRow> rows;
  double sup_x2 = 0, sup_l2 = 0, sup_m1 = 0;
  double m1_0 = 0;  // initial first moment
  double m2_0 = 0;  // (1/N) sum ||y_i(0)||_E^2
};

MomentSummary moment_sup(const Trajectory& traj);

/// exp(C) exp(exp(C) t) (C t + m1_0), C = max(M_v, M_T).
double first_moment_envelope(const GrowthEstimate& g, double m1_0, double t);
/// Bound on E ||y(t)||_E^2 from the same growth constants:
/// 4 e^{2Mt} [m2_0 + (Mt)^2 + 3 (Mt e^{2Mt})^2 (m2_0 + (Mt)^2 + 8 sigma d t) + 8 sigma d t].
double second_moment_envelope(const GrowthEstimate& g, double m2_0, double sigma, std::size_t dim, double t);

struct MomentCheck {
  MomentSummary summary;
  GrowthEstimate growth;
  double m1_envelope = 0;
  double m2_envelope = 0;
  bool inside() const;
};

/// Probes the growth constants on the ball holding the trajectory.
MomentCheck moment_monitor(const Trajectory& traj, const FieldPair& fp, double sigma, std::uint64_t seed,
                           std::size_t n_probe = 400);

// ------------------------------------------------------------------- Picard

struct PicardFit {
  std::vector<double> sup_diffs;
  std::vector<double> ratios;  // sup_diffs[n+1] / sup_diffs[n]
  double T = 0;
  double M_hat = 0;
  double intercept = 0;
  double residual = 0;  // RMS of the log fit
  std::size_t n_fit = 0;
  bool exact_fixed_point = false;  // diffs reached exactly 0
  bool super_geometric = false;
  double theta = 0;
  double radius = 0;  // ball radius used for delta_R
};

/// Fits log d[n] = (n+1) log(M T) - log((n+1)!) + c over the entries above the
/// round-off floor (1e-12 of the largest entry) and checks that the ratios
/// are strictly decreasing once below 1.
PicardFit fit_factorial_decay(std::span<const double> sup_diffs, double T);
/// Without an explicit theta or radius, delta_R is taken on the ball holding
/// a pilot run's whole path.
PicardFit picard_decay_report(const SimConfig& cfg, const EmpiricalMeasure& initial, std::size_t n_iters);

// ------------------------------------------------------------------ reports

ExperimentReport to_report(const WeakFormResult& r);
ExperimentReport to_report(const ConvergenceTable& t);
ExperimentReport to_report(const StabilityResult& r);
ExperimentReport to_report(const MomentCheck& m);
ExperimentReport to_report(const PicardFit& f);

}  // namespace mflab
