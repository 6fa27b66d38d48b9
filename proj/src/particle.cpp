#include "mflab/particle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mflab/errors.hpp"
#include "mflab/probes.hpp"
#include "mflab/rng.hpp"

namespace mflab {

namespace {

constexpr double kFeasTol = 1e-10;

struct Scratch {
  std::vector<double> v, t, g;
  Scratch(std::size_t d, std::size_t K) : v(d), t(K), g(K) {}
};

// Advance one agent. Field terms are evaluated at `eval`; the update is
// applied to the base state (x_base, lam_base). Returns the smallest entry
// of g when it is infeasible, 0 otherwise.
double advance_agent(const BoundField& b, AgentRef eval, std::span<const double> x_base,
                     std::span<const double> lam_base, std::span<const double> noise, const StepParams& p,
                     double rho, double amp, std::span<const double> shift, std::span<double> x_out,
                     std::span<double> lam_out, Scratch& s) {
  const std::size_t d = x_base.size(), K = lam_base.size();
  b.velocity(eval, s.v);
  for (std::size_t c = 0; c < d; ++c) x_out[c] = x_base[c] + s.v[c] * p.dt + amp * noise[c];

  b.label_drift(eval, shift, s.t);
  double gmin = 0;
  for (std::size_t k = 0; k < K; ++k) {
    s.g[k] = eval.lambda[k] + p.theta * s.t[k];
    gmin = std::min(gmin, s.g[k]);
  }
  if (gmin < -kFeasTol) return gmin;
  if (gmin < 0) {
    double total = 0;
    for (double& g : s.g) {
      g = std::max(g, 0.0);
      total += g;
    }
    for (std::size_t k = 0; k < K; ++k) lam_out[k] = lam_base[k] + rho * (s.g[k] / total - lam_base[k]);
  } else {
    for (std::size_t k = 0; k < K; ++k)
      lam_out[k] = lam_base[k] + rho * ((eval.lambda[k] - lam_base[k]) + p.theta * s.t[k]);
  }
  for (std::size_t k = 0; k < K; ++k)
    if (lam_out[k] < 0) lam_out[k] = 0;
  return 0;
}

[[noreturn]] void infeasible(std::size_t agent, double gmin, double theta) {
  std::ostringstream os;
  os << "theta too large for field's delta_R: agent " << agent << " has g entry " << gmin
     << " (theta = " << theta << ")";
  throw ConfigError(os.str());
}

void check_step_args(const EmpiricalMeasure& in, const StepParams& p, std::span<const double> noise,
                     const EmpiricalMeasure& out, std::span<const double> shift) {
  if (!(p.dt > 0) || !(p.theta > 0) || !(p.sigma >= 0)) throw UsageError("step needs dt > 0, theta > 0, sigma >= 0");
  if (noise.size() != in.size() * in.dim()) throw UsageError("noise must have shape N x d");
  if (out.size() != in.size() || !out.same_layout(in)) throw UsageError("step output has a different layout");
  if (!shift.empty() && shift.size() != in.n_labels()) throw UsageError("label shift has the wrong size");
}

void advance_all(const BoundField& b, const EmpiricalMeasure& eval, const EmpiricalMeasure& base,
                 const StepParams& p, std::span<const double> noise, std::span<const double> shift,
                 EmpiricalMeasure& out, bool parallel) {
  const std::size_t n = eval.size(), d = eval.dim(), K = eval.n_labels();
  const double rho = -std::expm1(-p.dt / p.theta);
  const double amp = std::sqrt(2 * p.sigma);
  std::vector<double> gmin(n, 0.0);
  if (parallel) {
#pragma omp parallel
    {
      Scratch s(d, K);
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        const AgentRef bi = base.agent(i);
        gmin[i] = advance_agent(b, eval.agent(i), bi.x, bi.lambda, noise.subspan(i * d, d), p, rho, amp,
                                shift, out.x_of(i), out.lambda_of(i), s);
      }
    }
  } else {
    Scratch s(d, K);
    for (std::size_t i = 0; i < n; ++i) {
      const AgentRef bi = base.agent(i);
      gmin[i] = advance_agent(b, eval.agent(i), bi.x, bi.lambda, noise.subspan(i * d, d), p, rho, amp, shift,
                              out.x_of(i), out.lambda_of(i), s);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (gmin[i] < 0) infeasible(i, gmin[i], p.theta);
}

void check_initial(const SimConfig& cfg, const EmpiricalMeasure& initial) {
  cfg.validate();
  if (initial.size() != cfg.N)
    throw UsageError("initial ensemble has " + std::to_string(initial.size()) + " agents, config says N = " +
                     std::to_string(cfg.N));
  if (initial.dim() != cfg.d) throw UsageError("initial ensemble dimension differs from config d");
  if (auto rd = cfg.field->required_dim(); rd && *rd != cfg.d)
    throw UsageError("field '" + cfg.field->name() + "' requires d = " + std::to_string(*rd));
  for (std::size_t i = 0; i < initial.size(); ++i) {
    LabelMeasure l(initial.space(), std::vector<double>(initial.agent(i).lambda.begin(), initial.agent(i).lambda.end()));
    if (!l.is_probability(1e-10)) throw InvariantError("initial agent " + std::to_string(i) + " label is not a probability measure");
  }
}

bool record_at(const SimConfig& cfg, std::size_t k, std::size_t n_steps) {
  return k % cfg.record_every == 0 || k == n_steps;
}

}  // namespace

void SimConfig::validate() const {
  if (N == 0) throw UsageError("N must be positive");
  if (d == 0) throw UsageError("d must be positive");
  if (!(dt > 0) || !std::isfinite(dt)) throw UsageError("dt must be positive");
  if (!(T >= dt) || !std::isfinite(T)) throw UsageError("T must be at least dt");
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw UsageError("sigma must be >= 0");
  if (theta && !(*theta > 0)) throw UsageError("theta must be positive");
  if (radius && !(*radius > 0 && std::isfinite(*radius))) throw UsageError("radius must be positive");
  if (!field) throw UsageError("no field selected");
  if (record_every == 0) throw UsageError("record_every must be positive");
}

std::size_t SimConfig::n_steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

double brownian_increment(std::uint64_t seed, std::size_t agent, std::size_t step, std::size_t coord,
                          std::size_t dim, double dt) {
  return std::sqrt(dt) * rng::normal(rng::derive(seed, {rng::kBrownian, agent}), step * dim + coord);
}

void fill_noise(std::uint64_t seed, std::size_t step, std::size_t n, std::size_t dim, double dt,
                std::span<double> out) {
  if (out.size() != n * dim) throw UsageError("noise buffer must have shape N x d");
  const double sdt = std::sqrt(dt);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t key = rng::derive(seed, {rng::kBrownian, i});
    for (std::size_t c = 0; c < dim; ++c) out[i * dim + c] = sdt * rng::normal(key, step * dim + c);
  }
}

void step(const EmpiricalMeasure& in, const FieldPair& fp, const StepParams& p, std::span<const double> noise,
          EmpiricalMeasure& out, std::span<const double> label_shift) {
  check_step_args(in, p, noise, out, label_shift);
  auto b = fp.bind(in);
  advance_all(*b, in, in, p, noise, label_shift, out, true);
}

void step_serial(const EmpiricalMeasure& in, const FieldPair& fp, const StepParams& p,
                 std::span<const double> noise, EmpiricalMeasure& out, std::span<const double> label_shift) {
  check_step_args(in, p, noise, out, label_shift);
  auto b = fp.bind(in);
  advance_all(*b, in, in, p, noise, label_shift, out, false);
}

double stepper_radius(const EmpiricalMeasure& initial) {
  double r = 0;
  for (std::size_t i = 0; i < initial.size(); ++i)
    r = std::max(r, energy_norm(*initial.space(), initial.agent(i)));
  return r + 1.0;
}

double feasibility_radius(const SimConfig& cfg, const EmpiricalMeasure& initial) {
  return cfg.radius ? *cfg.radius : stepper_radius(initial);
}

double resolve_theta(const SimConfig& cfg, const EmpiricalMeasure& initial) {
  ProbeDomain dom{initial.space(), cfg.d, feasibility_radius(cfg, initial), 8};
  const double delta = positivity_margin(*cfg.field, dom, rng::derive(cfg.seed, {rng::kProbe}));
  if (cfg.theta) {
    if (*cfg.theta * delta > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "theta = " << *cfg.theta << " violates theta * delta_R <= 1 (delta_R = " << delta << " at R = "
         << dom.radius << ")";
      throw ConfigError(os.str());
    }
    return *cfg.theta;
  }
  return delta > 0 ? std::min(1.0 / delta, kThetaCap) : kThetaCap;
}

Trajectory simulate(const SimConfig& cfg, const EmpiricalMeasure& initial, const StepObserver& observer) {
  check_initial(cfg, initial);
  const StepParams p{cfg.dt, cfg.sigma, resolve_theta(cfg, initial)};
  const std::size_t n_steps = cfg.n_steps(), nd = cfg.N * cfg.d;

  Trajectory traj;
  traj.theta = p.theta;
  traj.dim = cfg.d;
  traj.n_agents = cfg.N;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  if (cfg.record_noise) traj.noise.reserve(n_steps * nd);
  if (observer) observer(0, 0.0, initial);

  EmpiricalMeasure cur = initial, next = initial;
  std::vector<double> noise(nd);
  for (std::size_t k = 0; k < n_steps; ++k) {
    fill_noise(cfg.seed, k, cfg.N, cfg.d, cfg.dt, noise);
    try {
      step(cur, *cfg.field, p, noise, next);
    } catch (const ConfigError& e) {
      std::ostringstream os;
      os << e.what() << " at step " << k << " (t = " << static_cast<double>(k) * cfg.dt << ")";
      throw ConfigError(os.str());
    }
    std::swap(cur, next);
    if (cfg.record_noise) traj.noise.insert(traj.noise.end(), noise.begin(), noise.end());
    const double t = static_cast<double>(k + 1) * cfg.dt;
    if (observer) observer(k + 1, t, cur);
    if (record_at(cfg, k + 1, n_steps)) {
      traj.times.push_back(t);
      traj.states.push_back(cur);
    }
  }
  return traj;
}

PicardResult picard_solve(const SimConfig& cfg, const EmpiricalMeasure& initial, std::size_t n_iters) {
  check_initial(cfg, initial);
  const StepParams p{cfg.dt, cfg.sigma, resolve_theta(cfg, initial)};
  const std::size_t n_steps = cfg.n_steps(), nd = cfg.N * cfg.d;
  const LabelSpace& space = *initial.space();

  std::vector<double> noise(n_steps * nd);
  for (std::size_t k = 0; k < n_steps; ++k)
    fill_noise(cfg.seed, k, cfg.N, cfg.d, cfg.dt, std::span<double>(noise).subspan(k * nd, nd));

  std::vector<EmpiricalMeasure> prev(n_steps + 1, initial), next(n_steps + 1, initial);
  PicardResult res;
  for (std::size_t it = 0; it < n_iters; ++it) {
    for (std::size_t k = 0; k < n_steps; ++k) {
      auto b = cfg.field->bind(prev[k]);
      try {
        advance_all(*b, prev[k], next[k], p, std::span<const double>(noise).subspan(k * nd, nd), {},
                    next[k + 1], true);
      } catch (const ConfigError& e) {
        std::ostringstream os;
        os << e.what() << " at step " << k << " of Picard iterate " << it + 1;
        throw ConfigError(os.str());
      }
    }
    double sup = 0;
    for (std::size_t k = 0; k <= n_steps; ++k) {
      double acc = 0;
      for (std::size_t i = 0; i < cfg.N; ++i) acc += energy_distance(space, next[k].agent(i), prev[k].agent(i));
      sup = std::max(sup, acc / static_cast<double>(cfg.N));
    }
    res.sup_diffs.push_back(sup);
    std::swap(prev, next);
  }

  Trajectory& traj = res.trajectory;
  traj.theta = p.theta;
  traj.dim = cfg.d;
  traj.n_agents = cfg.N;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    if (!record_at(cfg, k, n_steps)) continue;
    traj.times.push_back(static_cast<double>(k) * cfg.dt);
    traj.states.push_back(prev[k]);
  }
  if (cfg.record_noise) traj.noise = std::move(noise);
  return res;
}

}  // namespace mflab
