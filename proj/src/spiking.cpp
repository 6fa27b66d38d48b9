#include "mflab/spiking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mflab/errors.hpp"
#include "mflab/rng.hpp"

namespace mflab {

void HeterogeneousNoiseSpec::validate(const LabelSpace& space) const {
  if (a.size() != e.size()) throw UsageError("heterogeneous noise: a and e must have the same length");
  for (std::size_t h = 0; h < a.size(); ++h) {
    if (!(a[h] >= 0) || !std::isfinite(a[h])) throw UsageError("heterogeneous noise: a_h must be finite and >= 0");
    if (e[h].size() != space.size()) throw UsageError("heterogeneous noise: basis measure has the wrong size");
    if (!e[h].is_zero_mass()) throw UsageError("heterogeneous noise: basis measure e_" + std::to_string(h + 1) + " must have zero mass");
  }
}

HeterogeneousNoiseSpec HeterogeneousNoiseSpec::default_basis(const LabelSpacePtr& space, double a0,
                                                             std::uint64_t seed_offset) {
  HeterogeneousNoiseSpec spec;
  spec.seed_offset = seed_offset;
  const auto order = space->coord_order();
  for (std::size_t h = 0; h + 1 < order.size(); ++h) {
    std::vector<double> w(space->size(), 0.0);
    const double dist = space->dist(order[h], order[h + 1]);
    w[order[h]] = 1.0 / dist;
    w[order[h + 1]] = -1.0 / dist;
    spec.e.emplace_back(space, std::move(w));
    spec.a.push_back(a0 * std::ldexp(1.0, -static_cast<int>(h + 1)));
  }
  return spec;
}

void SpikeConfig::validate() const {
  base.validate();
  if (base.d != 1) throw UsageError("spiking model requires d = 1");
  if (!std::isfinite(X_F) || !std::isfinite(X_R)) throw UsageError("X_F and X_R must be finite");
  if (!(X_R < X_F)) throw UsageError("spiking config violates X_R < X_F");
  if (X_F_range) {
    const auto [lo, hi] = *X_F_range;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) throw UsageError("X_F range must be a finite interval");
    if (!(X_R < lo)) throw UsageError("spiking config violates X_R < X_F (X_F range lower bound)");
  }
}

std::vector<double> SpikeRecord::spike_times(std::size_t agent) const {
  std::vector<double> out;
  for (const Spike& s : spikes)
    if (s.agent == agent) out.push_back(s.t);
  return out;
}

std::vector<double> SpikeRecord::inter_spike_intervals(std::size_t agent) const {
  std::vector<std::size_t> steps;
  for (const Spike& s : spikes)
    if (s.agent == agent) steps.push_back(s.step);
  std::vector<double> out;
  for (std::size_t j = 1; j < steps.size(); ++j) out.push_back(static_cast<double>(steps[j] - steps[j - 1]) * dt);
  return out;
}

LabelNoisePath::LabelNoisePath(const HeterogeneousNoiseSpec& spec, LabelSpacePtr space, std::uint64_t seed,
                               std::size_t n_steps, double dt)
    : H_(spec.H()), K_(space->size()), n_steps_(n_steps), w_((n_steps + 1) * spec.H(), 0.0),
      r_((n_steps + 1) * space->size(), 0.0) {
  spec.validate(*space);
  const double sdt = std::sqrt(dt);
  for (std::size_t h = 0; h < H_; ++h) {
    const std::uint64_t key = rng::derive(seed, {rng::kLabelNoise, spec.seed_offset, h});
    for (std::size_t k = 0; k < n_steps; ++k) w_[(k + 1) * H_ + h] = w_[k * H_ + h] + sdt * rng::normal(key, k);
  }
  for (std::size_t k = 0; k <= n_steps; ++k)
    for (std::size_t h = 0; h < H_; ++h) {
      const double s = spec.a[h] * W(h, k);
      for (std::size_t j = 0; j < K_; ++j) r_[k * K_ + j] += s * spec.e[h][j];
    }
}

LabelMeasure heterogeneous_label_drift(const LabelNoisePath& path, std::size_t t_index, AgentRef y,
                                       const EmpiricalMeasure& psi, const FieldPair& fp) {
  if (!fp.accepts_signed_labels())
    throw ConfigError("field '" + fp.name() + "' cannot take signed label arguments");
  if (t_index > path.n_steps()) throw UsageError("time index beyond the label noise path");
  std::vector<double> out(psi.n_labels());
  fp.bind(psi)->label_drift(y, path.R(t_index), out);
  return LabelMeasure(psi.space(), std::move(out));
}

std::vector<Spike> spiking_step(const EmpiricalMeasure& in, const FieldPair& fp, const StepParams& p,
                                double X_F, double X_R, std::span<const double> noise, EmpiricalMeasure& out,
                                std::size_t step_index, std::span<const double> label_shift) {
  if (in.dim() != 1) throw UsageError("spiking step requires d = 1");
  step(in, fp, p, noise, out, label_shift);
  std::vector<Spike> spikes;
  auto x = out.positions();
  const double t = static_cast<double>(step_index + 1) * p.dt;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (x[i] >= X_F) {
      spikes.push_back({i, step_index + 1, t, x[i] - X_F});
      x[i] = X_R;
    }
  }
  return spikes;
}

SpikingRun simulate_spiking(const SpikeConfig& cfg, const EmpiricalMeasure& initial, const StepObserver& observer) {
  cfg.validate();
  const SimConfig& base = cfg.base;
  if (initial.size() != base.N || initial.dim() != 1) throw UsageError("initial ensemble does not match the spiking config");
  if (cfg.het && !base.field->accepts_signed_labels())
    throw ConfigError("heterogeneous noise needs a field that accepts signed label arguments; '" +
                      base.field->name() + "' does not");
  const std::size_t n_steps = base.n_steps();

  double X_F = cfg.X_F;
  if (cfg.X_F_range) {
    const auto [lo, hi] = *cfg.X_F_range;
    X_F = lo + (hi - lo) * rng::uniform(rng::derive(base.seed, {rng::kThreshold}), 0);
  }
  for (double x : initial.positions())
    if (x > X_F) throw UsageError("initial potentials must not exceed X_F");

  std::optional<LabelNoisePath> path;
  if (cfg.het) path.emplace(*cfg.het, initial.space(), base.seed, n_steps, base.dt);

  const StepParams p{base.dt, base.sigma, resolve_theta(base, initial)};
  SpikingRun run;
  Trajectory& traj = run.trajectory;
  traj.theta = p.theta;
  traj.dim = 1;
  traj.n_agents = base.N;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  run.record = {base.N, base.dt, static_cast<double>(n_steps) * base.dt, X_F, {}};
  if (observer) observer(0, 0.0, initial);

  EmpiricalMeasure cur = initial, next = initial;
  std::vector<double> noise(base.N);
  for (std::size_t k = 0; k < n_steps; ++k) {
    fill_noise(base.seed, k, base.N, 1, base.dt, noise);
    std::vector<Spike> spikes;
    try {
      spikes = spiking_step(cur, *base.field, p, X_F, cfg.X_R, noise, next, k,
                            path ? path->R(k) : std::span<const double>{});
    } catch (const ConfigError& e) {
      std::ostringstream os;
      os << e.what() << " at step " << k << " (t = " << static_cast<double>(k) * base.dt << ")";
      throw ConfigError(os.str());
    }
    run.record.spikes.insert(run.record.spikes.end(), spikes.begin(), spikes.end());
    std::swap(cur, next);
    if (base.record_noise) traj.noise.insert(traj.noise.end(), noise.begin(), noise.end());
    const double t = static_cast<double>(k + 1) * base.dt;
    if (observer) observer(k + 1, t, cur);
    if ((k + 1) % base.record_every == 0 || k + 1 == n_steps) {
      traj.times.push_back(t);
      traj.states.push_back(cur);
    }
  }
  return run;
}

RateTable raster_and_rates(const SpikeRecord& record, double bin) {
  if (!(bin > 0) || !std::isfinite(bin)) throw UsageError("bin width must be positive");
  RateTable table;
  table.bin = bin;
  const auto n_bins = static_cast<std::size_t>(std::max(1.0, std::ceil(record.T / bin - 1e-9)));
  std::vector<std::size_t> counts(n_bins, 0);
  const double per_bin = bin / record.dt;
  const bool integral = record.dt > 0 && std::abs(per_bin - std::round(per_bin)) < 1e-9 && std::round(per_bin) >= 1;
  for (const Spike& s : record.spikes) {
    std::size_t j;
    if (integral) {
      const auto m = static_cast<std::size_t>(std::llround(per_bin));
      j = s.step == 0 ? 0 : (s.step - 1) / m;
    } else {
      j = s.t <= 0 ? 0 : static_cast<std::size_t>(std::ceil(s.t / bin)) - 1;
    }
    counts[std::min(j, n_bins - 1)]++;
  }
  const double norm = static_cast<double>(std::max<std::size_t>(record.n_agents, 1)) * bin;
  for (std::size_t j = 0; j < n_bins; ++j) {
    table.bin_start.push_back(static_cast<double>(j) * bin);
    table.rate.push_back(static_cast<double>(counts[j]) / norm);
  }
  return table;
}

KinkSummary detect_kinks(std::span<const double> trace, std::span<const std::size_t> spike_steps,
                         std::size_t window, double factor) {
  KinkSummary out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  const std::size_t n = trace.size();
  auto diff = [&](std::size_t j) { return trace[j + 1] - trace[j]; };
  for (std::size_t idx = 0; idx < spike_steps.size(); ++idx) {
    const std::size_t s = spike_steps[idx];
    if (s < window + 2 || s + 1 >= n) continue;
    if (idx > 0 && spike_steps[idx - 1] + window + 2 > s) continue;
    if (idx + 1 < spike_steps.size() && spike_steps[idx + 1] <= s + 1) continue;
    const double jump = std::abs(diff(s) - diff(s - 1));
    double local = 0;
    for (std::size_t j = s - 1 - window; j <= s - 2; ++j)
      local = std::max(local, std::abs(diff(j + 1) - diff(j)));
    ++out.checked;
    const double ratio = local > 0 ? jump / local : (jump > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.min_ratio = std::min(out.min_ratio, ratio);
    if (jump > factor * local && jump > 0) ++out.kinks;
  }
  if (out.checked == 0) out.min_ratio = 0;
  return out;
}

}  // namespace mflab
