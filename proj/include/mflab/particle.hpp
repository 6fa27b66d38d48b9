#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mflab/fields.hpp"

namespace mflab {

/// Upper cap for the default relaxation constant when the field's
/// positivity margin is small or zero.
inline constexpr double kThetaCap = 1.0;

struct SimConfig {
  std::size_t N = 0;
  std::size_t d = 1;
  double dt = 1e-3;
  double T = 1.0;
  double sigma = 0.0;
  std::optional<double> theta;  // unset: min(1 / delta_R, kThetaCap)
  /// Ball radius at which delta_R is taken; unset: stepper_radius(initial).
  std::optional<double> radius;
  std::uint64_t seed = 0;
  FieldPtr field;
  std::size_t record_every = 1;
  bool record_noise = false;

  void validate() const;
  std::size_t n_steps() const;
};

struct StepParams {
  double dt = 0;
  double sigma = 0;
  double theta = 1;
};

/// Gaussian increments with variance dt: agent i, step k, coordinate c reads
/// counter k * d + c of stream {kBrownian, i}.
double brownian_increment(std::uint64_t seed, std::size_t agent, std::size_t step, std::size_t coord,
                          std::size_t dim, double dt);
void fill_noise(std::uint64_t seed, std::size_t step, std::size_t n, std::size_t dim, double dt,
                std::span<double> out);

/// One step against the frozen snapshot `in`:
///   x' = x + v dt + sqrt(2 sigma) noise
///   lambda' = lambda + (1 - exp(-dt/theta)) (g - lambda),  g = lambda + theta T
/// `label_shift`, if nonempty, is added to the label argument of T for every
/// agent. OpenMP-parallel over agents.
void step(const EmpiricalMeasure& in, const FieldPair& fp, const StepParams& p,
          std::span<const double> noise, EmpiricalMeasure& out, std::span<const double> label_shift = {});
/// Serial reference for step; results are bit-identical.
void step_serial(const EmpiricalMeasure& in, const FieldPair& fp, const StepParams& p,
                 std::span<const double> noise, EmpiricalMeasure& out,
                 std::span<const double> label_shift = {});

struct Trajectory {
  std::vector<double> times;
  std::vector<EmpiricalMeasure> states;
  /// Increments per step, row-major (step, agent, coord); empty unless requested.
  std::vector<double> noise;
  double theta = 0;
  std::size_t dim = 0;
  std::size_t n_agents = 0;
};

/// Called at every grid index k (0..n_steps) with the state at time k dt.
using StepObserver = std::function<void(std::size_t k, double t, const EmpiricalMeasure& state)>;

/// Radius used for the positivity margin: max_i ||y_i||_E + 1.
double stepper_radius(const EmpiricalMeasure& initial);
/// cfg.radius if set, else stepper_radius(initial).
double feasibility_radius(const SimConfig& cfg, const EmpiricalMeasure& initial);
/// theta from cfg or the default rule; throws ConfigError when theta * delta_R > 1.
double resolve_theta(const SimConfig& cfg, const EmpiricalMeasure& initial);

Trajectory simulate(const SimConfig& cfg, const EmpiricalMeasure& initial, const StepObserver& observer = {});

struct PicardResult {
  Trajectory trajectory;
  std::vector<double> sup_diffs;
};

/// Picard iteration on the fixed noise path of cfg.seed. Iterate 0 is the
/// constant path at `initial`; entry n of sup_diffs is
/// max_k (1/N) sum_i ||Y_{n+1}(k) - Y_n(k)||_E.
PicardResult picard_solve(const SimConfig& cfg, const EmpiricalMeasure& initial, std::size_t n_iters);

}  // namespace mflab
