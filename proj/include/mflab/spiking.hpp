#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mflab/particle.hpp"

namespace mflab {

/// R(t) = sum_h a_h W_h(t) e_h with independent scalar Brownian motions W_h.
struct HeterogeneousNoiseSpec {
  std::vector<double> a;
  std::vector<LabelMeasure> e;
  std::uint64_t seed_offset = 0;

  std::size_t H() const { return a.size(); }
  void validate(const LabelSpace& space) const;

  /// e_h = (delta_{u_h} - delta_{u_{h+1}}) / d(u_h, u_{h+1}), a_h = a0 2^{-h}, h = 1..K-1
  /// (atoms taken in coordinate order).
  static HeterogeneousNoiseSpec default_basis(const LabelSpacePtr& space, double a0,
                                              std::uint64_t seed_offset = 0);
};

struct SpikeConfig {
  SimConfig base;
  double X_F = 0.7;
  double X_R = 0.01;
  /// When set, X_F is drawn once per run uniformly from this interval.
  std::optional<std::pair<double, double>> X_F_range;
  std::optional<HeterogeneousNoiseSpec> het;

  void validate() const;
};

struct Spike {
  std::size_t agent = 0;
  std::size_t step = 0;  // grid index of the recorded spike time
  double t = 0;
  double overshoot = 0;  // pre-reset value minus X_F
};

struct SpikeRecord {
  std::size_t n_agents = 0;
  double dt = 0;
  double T = 0;
  double X_F = 0;
  std::vector<Spike> spikes;  // ordered by (step, agent)

  std::vector<double> spike_times(std::size_t agent) const;
  std::vector<double> inter_spike_intervals(std::size_t agent) const;
};

/// Shared W_h paths on the grid, W_h(0) = 0.
class LabelNoisePath {
 public:
  LabelNoisePath(const HeterogeneousNoiseSpec& spec, LabelSpacePtr space, std::uint64_t seed,
                 std::size_t n_steps, double dt);

  double W(std::size_t h, std::size_t k) const { return w_[k * H_ + h]; }
  /// R(t_k) as a weight vector.
  std::span<const double> R(std::size_t k) const { return {r_.data() + k * K_, K_}; }
  std::size_t n_steps() const { return n_steps_; }

 private:
  std::size_t H_, K_, n_steps_;
  std::vector<double> w_, r_;
};

/// T_Psi(x, lambda + R(t_k)).
LabelMeasure heterogeneous_label_drift(const LabelNoisePath& path, std::size_t t_index, AgentRef y,
                                       const EmpiricalMeasure& psi, const FieldPair& fp);

/// particle step followed by threshold resets; new spikes are stamped with
/// grid index step_index + 1.
std::vector<Spike> spiking_step(const EmpiricalMeasure& in, const FieldPair& fp, const StepParams& p,
                                double X_F, double X_R, std::span<const double> noise, EmpiricalMeasure& out,
                                std::size_t step_index, std::span<const double> label_shift = {});

struct SpikingRun {
  Trajectory trajectory;
  SpikeRecord record;
};

SpikingRun simulate_spiking(const SpikeConfig& cfg, const EmpiricalMeasure& initial,
                            const StepObserver& observer = {});

struct RateTable {
  double bin = 0;
  std::vector<double> bin_start;
  std::vector<double> rate;  // spikes / (N bin)
};

/// Population rate over right-closed bins (j bin, (j+1) bin] covering [0, T].
RateTable raster_and_rates(const SpikeRecord& record, double bin);

struct KinkSummary {
  std::size_t checked = 0;
  std::size_t kinks = 0;
  double min_ratio = 0;  // smallest jump / local-variation ratio seen
};

/// Derivative discontinuities of a scalar label trace f(k) at spike indices:
/// a spike at s is a kink when |(f(s+1)-f(s)) - (f(s)-f(s-1))| exceeds
/// `factor` times the largest such change over the `window` steps before it.
/// Spikes too close to the ends or to another spike are skipped.
KinkSummary detect_kinks(std::span<const double> trace, std::span<const std::size_t> spike_steps,
                         std::size_t window = 5, double factor = 5.0);

}  // namespace mflab
