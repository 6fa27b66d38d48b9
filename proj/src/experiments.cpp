#include "mflab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mflab/errors.hpp"
#include "mflab/rng.hpp"
#include "mflab/wasserstein.hpp"

namespace mflab {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::size_t grid_index(double t, double dt, std::size_t n_steps) {
  const double k = t / dt;
  const auto idx = static_cast<std::size_t>(std::llround(k));
  if (std::abs(k - static_cast<double>(idx)) > 1e-6 || idx > n_steps) {
    std::ostringstream os;
    os << "check time " << t << " is not on the grid of step " << dt << " within the horizon";
    throw UsageError(os.str());
  }
  return idx;
}

// Smallest default theta over a set of initial ensembles, so that every run
// in one experiment shares the same relaxation constant.
double common_theta(const SimConfig& cfg, const std::vector<const EmpiricalMeasure*>& initials) {
  if (cfg.theta) return *cfg.theta;
  double theta = kThetaCap;
  for (const EmpiricalMeasure* e : initials) {
    SimConfig c = cfg;
    c.N = e->size();
    theta = std::min(theta, resolve_theta(c, *e));
  }
  return theta;
}

}  // namespace

WeakFormResult weak_form_residual(const SimConfig& cfg, const InitialLaw& law, const LabelSpacePtr& space,
                                  const std::vector<CylinderTestFunction>& family, std::size_t n_paths,
                                  std::uint64_t rep) {
  if (n_paths == 0) throw UsageError("weak_form_residual needs n_paths >= 1");
  for (const auto& f : family) f.validate(*space);
  const std::size_t n_steps = cfg.n_steps(), n_fn = family.size();

  std::vector<std::uint64_t> seeds(n_paths);
  std::vector<EmpiricalMeasure> initials;
  std::vector<const EmpiricalMeasure*> ptrs;
  for (std::size_t p = 0; p < n_paths; ++p) {
    seeds[p] = rng::derive(cfg.seed, {rng::kReplicate, rep, p});
    initials.push_back(sample_initial(law, space, cfg.N, cfg.d, seeds[p]));
  }
  for (const auto& e : initials) ptrs.push_back(&e);
  SimConfig run = cfg;
  run.theta = common_theta(cfg, ptrs);
  run.record_every = n_steps;
  run.record_noise = false;

  std::vector<std::vector<double>> acc(n_fn, std::vector<double>(n_steps + 1, 0.0));
  for (std::size_t p = 0; p < n_paths; ++p) {
    run.seed = seeds[p];
    std::vector<double> a0(n_fn, 0.0), integral(n_fn, 0.0);
    auto observer = [&](std::size_t k, double, const EmpiricalMeasure& s) {
      auto b = run.field->bind(s);
      const double inv = 1.0 / static_cast<double>(s.size());
      for (std::size_t f = 0; f < n_fn; ++f) {
        double a = 0, g = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          const AgentRef y = s.agent(i);
          a += family[f].value(y.x, y.lambda);
          if (k < n_steps) g += generator_apply(family[f], y, *b, run.sigma);
        }
        a *= inv;
        g *= inv;
        if (k == 0) a0[f] = a;
        acc[f][k] += a - a0[f] - integral[f];
        integral[f] += g * run.dt;
      }
    };
    simulate(run, initials[p], observer);
  }

  WeakFormResult res;
  for (const auto& f : family) res.names.push_back(f.name);
  for (std::size_t k = 0; k <= n_steps; ++k) res.times.push_back(static_cast<double>(k) * cfg.dt);
  res.residual.assign(n_fn, std::vector<double>(n_steps + 1));
  res.max_per_fn.assign(n_fn, 0.0);
  for (std::size_t f = 0; f < n_fn; ++f)
    for (std::size_t k = 0; k <= n_steps; ++k) {
      const double r = std::abs(acc[f][k] / static_cast<double>(n_paths));
      res.residual[f][k] = r;
      res.max_per_fn[f] = std::max(res.max_per_fn[f], r);
    }
  for (double m : res.max_per_fn) res.max_residual = std::max(res.max_residual, m);
  return res;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("loglog_slope needs two equal-length series of size >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool ConvergenceTable::median_nonincreasing(double rel_tol) const {
  for (std::size_t t = 0; t < t_checks.size(); ++t)
    for (std::size_t j = 1; j < Ns.size(); ++j)
      if (median[j][t] > median[j - 1][t] * (1 + rel_tol)) return false;
  return true;
}

ConvergenceTable meanfield_convergence(const SimConfig& tmpl, const InitialLaw& law, const LabelSpacePtr& space,
                                       const std::vector<std::size_t>& Ns, const std::vector<double>& t_checks,
                                       std::size_t n_reps, std::size_t n_ref) {
  if (Ns.empty() || n_reps == 0 || t_checks.empty()) throw UsageError("meanfield_convergence needs Ns, t_checks and n_reps >= 1");
  for (std::size_t j = 1; j < Ns.size(); ++j)
    if (!(Ns[j] > Ns[j - 1])) throw UsageError("Ns must be strictly increasing");
  if (Ns.front() == 0) throw UsageError("Ns must be positive");
  if (n_ref == 0) n_ref = Ns.back();
  if (Ns.back() > n_ref)
    throw UsageError("reference N = " + std::to_string(n_ref) + " is smaller than requested N = " + std::to_string(Ns.back()));
  const std::size_t n_steps = tmpl.n_steps();
  std::vector<std::size_t> idx;
  for (double t : t_checks) idx.push_back(grid_index(t, tmpl.dt, n_steps));

  std::vector<std::size_t> sizes = Ns;
  const bool ref_separate = n_ref != Ns.back();
  if (ref_separate) sizes.push_back(n_ref);

  ConvergenceTable table;
  table.Ns = Ns;
  table.t_checks = t_checks;
  table.n_ref = n_ref;
  table.n_reps = n_reps;

  // one theta shared by every run of every replicate
  std::vector<std::vector<EmpiricalMeasure>> initials(n_reps);
  std::vector<const EmpiricalMeasure*> ptrs;
  for (std::size_t r = 0; r < n_reps; ++r)
    for (std::size_t N : sizes) initials[r].push_back(sample_initial(law, space, N, tmpl.d, rng::derive(tmpl.seed, {rng::kReplicate, r, N})));
  for (auto& v : initials)
    for (auto& e : v) ptrs.push_back(&e);
  SimConfig cfg = tmpl;
  cfg.theta = common_theta(tmpl, ptrs);
  cfg.record_every = n_steps;
  cfg.record_noise = false;

  for (std::size_t r = 0; r < n_reps; ++r) {
    std::vector<std::vector<EmpiricalMeasure>> snaps(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      cfg.N = sizes[j];
      cfg.seed = rng::derive(tmpl.seed, {rng::kReplicate, r, sizes[j]});
      auto& out = snaps[j];
      simulate(cfg, initials[r][j], [&](std::size_t k, double, const EmpiricalMeasure& s) {
        for (std::size_t c : idx)
          if (c == k) out.push_back(s);
      });
    }
    const auto& ref = snaps.back();
    std::vector<std::vector<double>> w(Ns.size(), std::vector<double>(t_checks.size(), 0.0));
    for (std::size_t j = 0; j < Ns.size(); ++j)
      for (std::size_t t = 0; t < t_checks.size(); ++t)
        w[j][t] = (!ref_separate && j + 1 == Ns.size()) ? 0.0 : w1_product(snaps[j][t], ref[t]);
    table.w1.push_back(std::move(w));
  }

  table.mean.assign(Ns.size(), std::vector<double>(t_checks.size(), 0.0));
  table.median.assign(Ns.size(), std::vector<double>(t_checks.size(), 0.0));
  for (std::size_t j = 0; j < Ns.size(); ++j)
    for (std::size_t t = 0; t < t_checks.size(); ++t) {
      std::vector<double> col;
      for (std::size_t r = 0; r < n_reps; ++r) col.push_back(table.w1[r][j][t]);
      double s = 0;
      for (double v : col) s += v;
      table.mean[j][t] = s / static_cast<double>(n_reps);
      table.median[j][t] = median_of(col);
    }
  for (std::size_t t = 0; t < t_checks.size(); ++t) {
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < Ns.size(); ++j)
      if (table.mean[j][t] > 0) {
        xs.push_back(static_cast<double>(Ns[j]));
        ys.push_back(table.mean[j][t]);
      }
    table.slope.push_back(xs.size() >= 2 ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN());
  }
  return table;
}

double stability_constant(double T, double L) { return 1.0 + std::exp(std::exp(T * L)) * std::exp(T * L); }

bool StabilityResult::passed() const {
  for (const auto& r : rows)
    if (!(r.w1 <= r.bound * (1 + 1e-12) + 1e-12)) return false;
  return true;
}

StabilityResult stability_check(const SimConfig& cfg, const EmpiricalMeasure& initial1,
                                const EmpiricalMeasure& initial2, const std::vector<double>& t_checks,
                                std::size_t n_probe) {
  if (!initial1.same_layout(initial2) || initial1.size() != initial2.size())
    throw UsageError("stability_check needs two ensembles of the same size and layout");
  const std::size_t n_steps = cfg.n_steps();
  std::vector<std::size_t> idx;
  for (double t : t_checks) idx.push_back(grid_index(t, cfg.dt, n_steps));

  StabilityResult res;
  SimConfig run = cfg;
  run.N = initial1.size();
  run.theta = common_theta(run, {&initial1, &initial2});
  run.record_every = n_steps;
  res.theta = *run.theta;

  const LabelSpace& space = *initial1.space();
  double radius = 0;
  std::vector<std::vector<EmpiricalMeasure>> snaps(2);
  for (int which = 0; which < 2; ++which) {
    auto& out = snaps[which];
    simulate(run, which == 0 ? initial1 : initial2, [&](std::size_t k, double, const EmpiricalMeasure& s) {
      for (std::size_t i = 0; i < s.size(); ++i) radius = std::max(radius, energy_norm(space, s.agent(i)));
      for (std::size_t c : idx)
        if (c == k) out.push_back(s);
    });
  }
  res.radius = radius;
  res.w1_initial = w1_product(initial1, initial2);
  ProbeDomain dom{initial1.space(), initial1.dim(), radius, 8};
  res.lipschitz = probe_lipschitz(*cfg.field, dom, n_probe, rng::derive(cfg.seed, {rng::kProbe, 7}));
  const double L = res.lipschitz.L_R();
  const double T = static_cast<double>(n_steps) * cfg.dt;
  res.C = stability_constant(T, L);
  for (std::size_t c = 0; c < idx.size(); ++c) {
    StabilityRow row;
    row.t = t_checks[c];
    row.w1 = w1_product(snaps[0][c], snaps[1][c]);
    row.bound = res.w1_initial == 0 ? 0.0 : res.C * std::exp(row.t * L) * res.w1_initial;
    res.rows.push_back(row);
  }
  return res;
}

MomentSummary moment_sup(const Trajectory& traj) {
  MomentSummary m;
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const EmpiricalMeasure& e = traj.states[s];
    const LabelSpace& space = *e.space();
    MomentRow row;
    row.t = traj.times[s];
    double m2 = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const AgentRef y = e.agent(i);
      const double nx = euclidean_norm(y.x), nl = bl_norm(space, y.lambda);
      row.x2 += nx * nx;
      row.l2 += nl * nl;
      row.m1 += nx + nl;
      m2 += (nx + nl) * (nx + nl);
    }
    const double inv = 1.0 / static_cast<double>(e.size());
    row.x2 *= inv;
    row.l2 *= inv;
    row.m1 *= inv;
    if (s == 0) {
      m.m1_0 = row.m1;
      m.m2_0 = m2 * inv;
    }
    m.sup_x2 = std::max(m.sup_x2, row.x2);
    m.sup_l2 = std::max(m.sup_l2, row.l2);
    m.sup_m1 = std::max(m.sup_m1, row.m1);
    m.rows.push_back(row);
  }
  return m;
}

double first_moment_envelope(const GrowthEstimate& g, double m1_0, double t) {
  const double C = std::max(g.M_v, g.M_T);
  return std::exp(C) * std::exp(std::exp(C) * t) * (C * t + m1_0);
}

double second_moment_envelope(const GrowthEstimate& g, double m2_0, double sigma, std::size_t dim, double t) {
  const double M = std::max(g.M_v, g.M_T);
  const double Mt = M * t, e2 = std::exp(2 * M * t);
  const double bm = 8 * sigma * static_cast<double>(dim) * t;
  const double inner = 3 * (m2_0 + Mt * Mt + bm);
  return 4 * e2 * (m2_0 + Mt * Mt + (Mt * e2) * (Mt * e2) * inner + bm);
}

bool MomentCheck::inside() const {
  return summary.sup_m1 <= m1_envelope && summary.sup_x2 <= m2_envelope && summary.sup_l2 <= m2_envelope;
}

MomentCheck moment_monitor(const Trajectory& traj, const FieldPair& fp, double sigma, std::uint64_t seed,
                           std::size_t n_probe) {
  if (traj.states.empty()) throw UsageError("moment_monitor needs a nonempty trajectory");
  MomentCheck c;
  c.summary = moment_sup(traj);
  double radius = 1.0;
  for (const auto& e : traj.states)
    for (std::size_t i = 0; i < e.size(); ++i) radius = std::max(radius, energy_norm(*e.space(), e.agent(i)));
  ProbeDomain dom{traj.states.front().space(), traj.states.front().dim(), radius, 8};
  c.growth = probe_growth(fp, dom, n_probe, rng::derive(seed, {rng::kProbe, 5}));
  const double T = traj.times.back();
  c.m1_envelope = first_moment_envelope(c.growth, c.summary.m1_0, T);
  c.m2_envelope = second_moment_envelope(c.growth, c.summary.m2_0, sigma, traj.states.front().dim(), T);
  return c;
}

PicardFit fit_factorial_decay(std::span<const double> d, double T) {
  PicardFit f;
  f.sup_diffs.assign(d.begin(), d.end());
  f.T = T;
  double top = 0;
  for (double v : d) top = std::max(top, v);
  const double floor = 1e-12 * top;
  std::size_t usable = 0;
  while (usable < d.size() && d[usable] > floor) ++usable;
  f.exact_fixed_point = usable < d.size() && d[usable] == 0.0;
  for (std::size_t n = 0; n + 1 < usable; ++n) f.ratios.push_back(d[n + 1] / d[n]);

  // log d[n] + log((n+1)!) = (n+1) beta + c
  double sz = 0, sy = 0, szz = 0, szy = 0;
  for (std::size_t n = 0; n < usable; ++n) {
    const double z = static_cast<double>(n + 1), y = std::log(d[n]) + std::lgamma(static_cast<double>(n + 2));
    sz += z;
    sy += y;
    szz += z * z;
    szy += z * y;
  }
  f.n_fit = usable;
  if (usable >= 2) {
    const double k = static_cast<double>(usable);
    const double beta = (k * szy - sz * sy) / (k * szz - sz * sz);
    f.intercept = (sy - beta * sz) / k;
    f.M_hat = std::exp(beta) / T;
    double ss = 0;
    for (std::size_t n = 0; n < usable; ++n) {
      const double z = static_cast<double>(n + 1), y = std::log(d[n]) + std::lgamma(static_cast<double>(n + 2));
      const double e = y - (beta * z + f.intercept);
      ss += e * e;
    }
    f.residual = std::sqrt(ss / k);
  }

  bool below = false, ok = true;
  for (std::size_t n = 0; n < f.ratios.size(); ++n) {
    if (below && !(f.ratios[n] < f.ratios[n - 1])) ok = false;
    if (f.ratios[n] < 1) below = true;
  }
  if (usable == 0) ok = f.exact_fixed_point;
  for (std::size_t n = usable; n < d.size() && usable > 0; ++n)
    if (d[n] > d[usable - 1]) ok = false;
  f.super_geometric = ok && (below || f.exact_fixed_point);
  if (usable <= 1 && f.exact_fixed_point) f.super_geometric = ok;
  return f;
}

PicardFit picard_decay_report(const SimConfig& cfg, const EmpiricalMeasure& initial, std::size_t n_iters) {
  if (n_iters < 4) throw UsageError("picard_decay_report needs n_iters >= 4");
  SimConfig run = cfg;
  if (!run.radius && !run.theta) {
    // ball holding the whole path, from a pilot run at the conservative default
    SimConfig pilot = cfg;
    pilot.record_every = cfg.n_steps();
    pilot.record_noise = false;
    double r = 0;
    simulate(pilot, initial, [&](std::size_t, double, const EmpiricalMeasure& s) {
      for (std::size_t i = 0; i < s.size(); ++i) r = std::max(r, energy_norm(*s.space(), s.agent(i)));
    });
    run.radius = r;
  }
  const auto res = picard_solve(run, initial, n_iters);
  PicardFit f = fit_factorial_decay(res.sup_diffs, static_cast<double>(cfg.n_steps()) * cfg.dt);
  f.theta = res.trajectory.theta;
  f.radius = run.radius ? *run.radius : stepper_radius(initial);
  return f;
}

// ------------------------------------------------------------------ reports

ExperimentReport to_report(const WeakFormResult& r) {
  ExperimentReport rep;
  rep.name = "weakform";
  rep.metrics.columns = {"t"};
  for (const auto& n : r.names) rep.metrics.columns.push_back("abs_r[" + n + "]");
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    std::vector<double> row{r.times[k]};
    for (const auto& col : r.residual) row.push_back(col[k]);
    rep.metrics.add_row(std::move(row));
  }
  for (std::size_t f = 0; f < r.names.size(); ++f) rep.add_parameter("max_abs_r[" + r.names[f] + "]", r.max_per_fn[f]);
  rep.add_parameter("max_residual", r.max_residual);
  rep.check("finite residual", "weak-form residual trace is finite", std::isfinite(r.max_residual), r.max_residual);
  return rep;
}

ExperimentReport to_report(const ConvergenceTable& t) {
  ExperimentReport rep;
  rep.name = "converge";
  rep.add_parameter("n_ref", static_cast<double>(t.n_ref));
  rep.add_parameter("n_reps", static_cast<double>(t.n_reps));
  rep.metrics.columns = {"N", "t", "w1_mean", "w1_median"};
  for (std::size_t j = 0; j < t.Ns.size(); ++j)
    for (std::size_t c = 0; c < t.t_checks.size(); ++c)
      rep.metrics.add_row({static_cast<double>(t.Ns[j]), t.t_checks[c], t.mean[j][c], t.median[j][c]});
  for (std::size_t c = 0; c < t.t_checks.size(); ++c)
    rep.add_parameter("loglog_slope[t=" + format_double(t.t_checks[c]) + "]", t.slope[c]);
  rep.check("monotone in N", "median W1 to the reference is nonincreasing in N", t.median_nonincreasing());
  return rep;
}

ExperimentReport to_report(const StabilityResult& r) {
  ExperimentReport rep;
  rep.name = "stability";
  rep.add_parameter("w1_initial", r.w1_initial);
  rep.add_parameter("radius", r.radius);
  rep.add_parameter("L_v_hat", r.lipschitz.L_v);
  rep.add_parameter("L_T_hat", r.lipschitz.L_T);
  rep.add_parameter("C", r.C);
  rep.add_parameter("theta", r.theta);
  rep.metrics.columns = {"t", "w1", "bound", "margin"};
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& row : r.rows) {
    rep.metrics.add_row({row.t, row.w1, row.bound, row.bound - row.w1});
    worst = std::min(worst, row.bound - row.w1);
  }
  rep.check("W1 bound", "W1(L1_t, L2_t) <= C exp(t L_R) W1(L1_0, L2_0)", r.passed(), worst);
  return rep;
}

ExperimentReport to_report(const MomentCheck& m) {
  ExperimentReport rep;
  rep.name = "moments";
  rep.add_parameter("M_v_hat", m.growth.M_v);
  rep.add_parameter("M_T_hat", m.growth.M_T);
  rep.add_parameter("m1_0", m.summary.m1_0);
  rep.add_parameter("m2_0", m.summary.m2_0);
  rep.add_parameter("m1_envelope", m.m1_envelope);
  rep.add_parameter("m2_envelope", m.m2_envelope);
  rep.metrics.columns = {"t", "mean_x2", "mean_bl2", "m1"};
  for (const auto& row : m.summary.rows) rep.metrics.add_row({row.t, row.x2, row.l2, row.m1});
  rep.check("m1 envelope", "sup_t m1 <= first-moment Gronwall envelope", m.summary.sup_m1 <= m.m1_envelope,
            m.summary.sup_m1, m.m1_envelope);
  rep.check("x2 envelope", "sup_t E|X|^2 <= second-moment envelope", m.summary.sup_x2 <= m.m2_envelope,
            m.summary.sup_x2, m.m2_envelope);
  rep.check("bl2 envelope", "sup_t E||lambda||_BL^2 <= second-moment envelope", m.summary.sup_l2 <= m.m2_envelope,
            m.summary.sup_l2, m.m2_envelope);
  rep.check("bl norm", "||lambda||_BL <= 1", m.summary.sup_l2 <= 1 + 1e-12, m.summary.sup_l2, 1.0);
  return rep;
}

ExperimentReport to_report(const PicardFit& f) {
  ExperimentReport rep;
  rep.name = "picard";
  rep.add_parameter("T", f.T);
  rep.add_parameter("M_hat", f.M_hat);
  rep.add_parameter("M_hat_T", f.M_hat * f.T);
  rep.add_parameter("fit_residual", f.residual);
  rep.add_parameter("n_fit", static_cast<double>(f.n_fit));
  rep.add_parameter("theta", f.theta);
  rep.add_parameter("radius", f.radius);
  rep.metrics.columns = {"n", "sup_diff", "ratio"};
  for (std::size_t n = 0; n < f.sup_diffs.size(); ++n)
    rep.metrics.add_row({static_cast<double>(n), f.sup_diffs[n],
                         n < f.ratios.size() ? f.ratios[n] : std::numeric_limits<double>::quiet_NaN()});
  rep.check("super-geometric decay", "ratios strictly decreasing once below 1", f.super_geometric);
  return rep;
}

}  // namespace mflab
