#include "mflab/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mflab/csv_io.hpp"
#include "mflab/experiments.hpp"
#include "mflab/rng.hpp"
#include "mflab/svg.hpp"
#include "mflab/test_functions.hpp"

namespace mflab {

bool RunOutcome::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const ExperimentReport& r) { return r.passed(); });
}

namespace {

namespace fs = std::filesystem;

class Artifacts {
 public:
  Artifacts(const RunConfig& cfg, RunOutcome& outcome) : dir_(cfg.out_dir), svg_(cfg.emit_svg), outcome_(outcome) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  template <class F>
  void write(const std::string& name, F&& body) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
    outcome_.files.push_back(name);
  }

  void plot(const std::string& name, const PlotSpec& spec, const std::vector<Series>& series) {
    if (!svg_) return;
    write(name, [&](std::ostream& o) { write_svg_plot(o, spec, series); });
  }

  void metrics(const std::string& name, const MetricsTable& t) {
    write(name, [&](std::ostream& o) { write_metrics_csv(o, t); });
  }

 private:
  fs::path dir_;
  bool svg_;
  RunOutcome& outcome_;
};

std::vector<double> default_checks(const SimConfig& s, std::vector<double> fractions) {
  const double n = static_cast<double>(s.n_steps());
  std::vector<double> out;
  for (double f : fractions) {
    const double t = std::max(1.0, std::round(f * n)) * s.dt;
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

bool in_simplex(const EmpiricalMeasure& e, double tol) {
  const std::size_t K = e.n_labels();
  const auto lam = e.labels();
  for (std::size_t i = 0; i < e.size(); ++i) {
    double sum = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const double w = lam[i * K + k];
      if (!(w >= -tol)) return false;
      sum += w;
    }
    if (!(std::abs(sum - 1.0) <= tol)) return false;
  }
  return true;
}

double label_mean_coord(const LabelSpace& space, std::span<const double> lambda) {
  double s = 0;
  for (std::size_t k = 0; k < lambda.size(); ++k) s += lambda[k] * space.coord(k);
  return s;
}

void trajectory_plots(Artifacts& art, const Trajectory& traj, const LabelSpace& space) {
  const std::size_t fan = std::min<std::size_t>(traj.n_agents, 20);
  std::vector<Series> xs(fan);
  for (std::size_t i = 0; i < fan; ++i) {
    xs[i].label = "agent " + std::to_string(i);
    for (std::size_t r = 0; r < traj.states.size(); ++r) {
      xs[i].x.push_back(traj.times[r]);
      xs[i].y.push_back(traj.states[r].agent(i).x[0]);
    }
  }
  art.plot("positions.svg", {"position paths", "t", "x_1"}, xs);

  std::vector<Series> ls(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    ls[k].label = "mean lambda[" + space.ids()[k] + "]";
    for (std::size_t r = 0; r < traj.states.size(); ++r) {
      const auto& s = traj.states[r];
      double m = 0;
      for (std::size_t i = 0; i < s.size(); ++i) m += s.agent(i).lambda[k];
      ls[k].x.push_back(traj.times[r]);
      ls[k].y.push_back(m / static_cast<double>(s.size()));
    }
  }
  art.plot("labels.svg", {"label components (population mean)", "t", "weight"}, ls);
}

void write_trajectory(Artifacts& art, const Trajectory& traj) {
  art.write("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
  if (!traj.noise.empty()) art.write("noise.csv", [&](std::ostream& o) { write_noise_csv(o, traj); });
}

// ------------------------------------------------------------------ modes

ExperimentReport run_simulate(const RunConfig& cfg, Artifacts& art) {
  const EmpiricalMeasure init = sample_initial(cfg.initial, cfg.space, cfg.sim.N, cfg.sim.d, cfg.seed);
  bool simplex = true;
  std::size_t agent_steps = 0;
  const Trajectory traj = simulate(cfg.sim, init, [&](std::size_t, double, const EmpiricalMeasure& s) {
    simplex = simplex && in_simplex(s, 1e-10);
    agent_steps += s.size();
  });
  write_trajectory(art, traj);
  trajectory_plots(art, traj, *cfg.space);

  ExperimentReport rep;
  rep.name = "simulate";
  rep.add_parameter("theta", traj.theta);
  rep.add_parameter("agent_steps", static_cast<double>(agent_steps));
  const auto& last = traj.states.back();
  rep.metrics.columns = {"t", "mean_x1", "m1"};
  for (std::size_t r = 0; r < traj.states.size(); ++r)
    rep.metrics.add_row({traj.times[r], traj.states[r].mean_position(0), traj.states[r].first_moment()});
  rep.check("simplex", "every lambda has weights >= 0 summing to 1 within 1e-10", simplex, 0, 1e-10);
  rep.check("finite", "final positions finite",
            std::all_of(last.positions().begin(), last.positions().end(), [](double v) { return std::isfinite(v); }));
  return rep;
}

ExperimentReport run_spiking(const RunConfig& cfg, Artifacts& art) {
  const SpikeConfig sc = cfg.spike_config();
  const EmpiricalMeasure init = sample_initial(cfg.initial, cfg.space, cfg.sim.N, cfg.sim.d, cfg.seed);
  const std::size_t n_steps = cfg.sim.n_steps();
  const std::size_t tracked = std::min(cfg.exp.kink_agents, cfg.sim.N);
  std::vector<std::vector<double>> traces(tracked, std::vector<double>(n_steps + 1, 0.0));
  double max_x = -std::numeric_limits<double>::infinity();
  bool simplex = true;
  const SpikingRun out = simulate_spiking(sc, init, [&](std::size_t k, double, const EmpiricalMeasure& s) {
    for (std::size_t i = 0; i < tracked; ++i) traces[i][k] = label_mean_coord(*cfg.space, s.agent(i).lambda);
    for (double x : s.positions()) max_x = std::max(max_x, x);
    simplex = simplex && in_simplex(s, 1e-10);
  });
  const SpikeRecord& rec = out.record;

  KinkSummary total;
  total.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tracked; ++i) {
    std::vector<std::size_t> steps;
    for (const Spike& s : rec.spikes)
      if (s.agent == i) steps.push_back(s.step);
    const KinkSummary ks = detect_kinks(traces[i], steps);
    total.checked += ks.checked;
    total.kinks += ks.kinks;
    if (ks.checked) total.min_ratio = std::min(total.min_ratio, ks.min_ratio);
  }

  const RateTable rates = raster_and_rates(rec, cfg.exp.rate_bin);
  write_trajectory(art, out.trajectory);
  art.write("raster.csv", [&](std::ostream& o) { write_raster_csv(o, rec); });
  art.write("rates.csv", [&](std::ostream& o) { write_rates_csv(o, rates); });
  trajectory_plots(art, out.trajectory, *cfg.space);
  {
    Series sc_raster{"spikes", {}, {}};
    for (const Spike& s : rec.spikes)
      if (s.agent < 100) {
        sc_raster.x.push_back(s.t);
        sc_raster.y.push_back(static_cast<double>(s.agent));
      }
    PlotSpec spec{"spike raster (agents < 100)", "t", "agent"};
    spec.scatter = true;
    art.plot("raster.svg", spec, {sc_raster});
    art.plot("rates.svg", {"population rate", "t", "spikes / (N bin)"}, {{"rate", rates.bin_start, rates.rate}});
    std::vector<Series> tr;
    for (std::size_t i = 0; i < std::min<std::size_t>(tracked, 5); ++i) {
      Series s{"agent " + std::to_string(i), {}, traces[i]};
      for (std::size_t k = 0; k <= n_steps; ++k) s.x.push_back(static_cast<double>(k) * cfg.sim.dt);
      tr.push_back(std::move(s));
    }
    art.plot("label_traces.svg", {"<lambda, id> for tracked agents", "t", "label mean"}, tr);
  }

  ExperimentReport rep;
  rep.name = "spiking";
  rep.add_parameter("theta", out.trajectory.theta);
  rep.add_parameter("X_F", rec.X_F);
  rep.add_parameter("X_R", cfg.X_R);
  rep.add_parameter("spikes", static_cast<double>(rec.spikes.size()));
  rep.add_parameter("kinks_checked", static_cast<double>(total.checked));
  rep.add_parameter("kinks_found", static_cast<double>(total.kinks));
  rep.add_parameter("kink_min_ratio", total.checked ? total.min_ratio : 0.0);
  rep.metrics.columns = {"bin_start", "rate"};
  for (std::size_t j = 0; j < rates.rate.size(); ++j) rep.metrics.add_row({rates.bin_start[j], rates.rate[j]});
  const double per100 = 100.0 * static_cast<double>(rec.spikes.size()) / static_cast<double>(cfg.sim.N);
  rep.check("spike count", "at least 1 spike per 100 agents over [0, T]", per100 >= 1.0, per100, 1.0);
  rep.check("reset", "all potentials <= X_F after resets", max_x <= rec.X_F, max_x, rec.X_F);
  rep.check("simplex", "every lambda stays in the simplex within 1e-10", simplex);
  rep.check("kinks", "lambda traces of tracked agents kink at every checked spike",
            total.checked > 0 && total.kinks == total.checked, static_cast<double>(total.kinks),
            static_cast<double>(total.checked));
  return rep;
}

ExperimentReport run_converge(const RunConfig& cfg, Artifacts& art) {
  std::vector<double> checks = cfg.exp.t_checks;
  if (checks.empty()) checks = default_checks(cfg.sim, {0.25, 0.5, 1.0});
  const ConvergenceTable t =
      meanfield_convergence(cfg.sim, cfg.initial, cfg.space, cfg.exp.Ns, checks, cfg.exp.n_reps, cfg.exp.n_ref);
  ExperimentReport rep = to_report(t);
  std::vector<Series> series;
  for (std::size_t c = 0; c < checks.size(); ++c) {
    Series s{"t = " + format_double(checks[c]), {}, {}};
    for (std::size_t j = 0; j < t.Ns.size(); ++j) {
      s.x.push_back(static_cast<double>(t.Ns[j]));
      s.y.push_back(t.mean[j][c]);
    }
    series.push_back(std::move(s));
  }
  PlotSpec spec{"W1 to the reference ensemble", "N", "mean W1"};
  spec.logx = spec.logy = true;
  art.plot("w1_decay.svg", spec, series);
  return rep;
}

ExperimentReport run_stability(const RunConfig& cfg, Artifacts& art) {
  std::vector<double> checks = cfg.exp.t_checks;
  if (checks.empty()) checks = default_checks(cfg.sim, {0.2, 0.4, 0.6, 0.8, 1.0});
  ExperimentReport rep;
  rep.name = "stability";
  rep.add_parameter("n_reps", static_cast<double>(cfg.exp.n_reps));
  rep.add_parameter("perturb", cfg.exp.perturb);
  rep.metrics.columns = {"rep", "t", "w1", "bound", "margin"};
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  std::vector<Series> series;
  for (std::size_t r = 0; r < cfg.exp.n_reps; ++r) {
    const std::uint64_t seed = rng::derive(cfg.seed, {rng::kReplicate, r});
    const EmpiricalMeasure a = sample_initial(cfg.initial, cfg.space, cfg.sim.N, cfg.sim.d, seed);
    EmpiricalMeasure b = a;
    const std::uint64_t key = rng::derive(seed, {rng::kInitial, 1});
    auto xs = b.positions();
    for (std::size_t j = 0; j < xs.size(); ++j) xs[j] += cfg.exp.perturb * rng::normal(key, j);
    SimConfig sim = cfg.sim;
    sim.seed = seed;
    const StabilityResult res = stability_check(sim, a, b, checks, cfg.exp.n_probe);
    ok = ok && res.passed();
    Series s{"rep " + std::to_string(r), {}, {}};
    for (const auto& row : res.rows) {
      rep.metrics.add_row({static_cast<double>(r), row.t, row.w1, row.bound, row.bound - row.w1});
      worst = std::min(worst, row.bound - row.w1);
      s.x.push_back(row.t);
      s.y.push_back(row.w1);
    }
    if (r == 0) {
      rep.add_parameter("theta", res.theta);
      rep.add_parameter("L_R_hat[rep 0]", res.lipschitz.L_R());
      rep.add_parameter("C[rep 0]", res.C);
    }
    if (series.size() < 10) series.push_back(std::move(s));
  }
  rep.check("W1 bound", "W1(L1_t, L2_t) <= C exp(t L_R) W1(L1_0, L2_0) for every rep and check time", ok, worst);
  art.plot("stability.svg", {"paired-run W1", "t", "W1"}, series);
  return rep;
}

ExperimentReport run_weakform(const RunConfig& cfg, Artifacts& art) {
  const auto family = default_test_family(*cfg.space);
  const WeakFormResult r = weak_form_residual(cfg.sim, cfg.initial, cfg.space, family, cfg.exp.n_paths);
  std::vector<Series> series;
  for (std::size_t f = 0; f < r.names.size(); ++f) series.push_back({r.names[f], r.times, r.residual[f]});
  art.plot("weakform.svg", {"weak-form residual", "t", "|r(t)|"}, series);
  return to_report(r);
}

ExperimentReport run_picard(const RunConfig& cfg, Artifacts& art) {
  const EmpiricalMeasure init = sample_initial(cfg.initial, cfg.space, cfg.sim.N, cfg.sim.d, cfg.seed);
  const PicardFit f = picard_decay_report(cfg.sim, init, cfg.exp.n_iters);
  Series s{"sup diff", {}, {}};
  for (std::size_t n = 0; n < f.sup_diffs.size(); ++n)
    if (f.sup_diffs[n] > 0) {
      s.x.push_back(static_cast<double>(n));
      s.y.push_back(f.sup_diffs[n]);
    }
  PlotSpec spec{"Picard iterate differences", "n", "sup diff"};
  spec.logy = true;
  art.plot("picard.svg", spec, {s});
  return to_report(f);
}

std::vector<ExperimentReport> run_moments(const RunConfig& cfg, Artifacts& art) {
  std::vector<ExperimentReport> reps;
  std::vector<double> sup_x2, sup_l2;
  std::vector<Series> series;
  for (std::size_t N : cfg.exp.Ns) {
    SimConfig sim = cfg.sim;
    sim.N = N;
    const EmpiricalMeasure init = sample_initial(cfg.initial, cfg.space, N, sim.d, cfg.seed, N);
    const Trajectory traj = simulate(sim, init);
    const MomentCheck m = moment_monitor(traj, *sim.field, sim.sigma, cfg.seed, cfg.exp.n_probe);
    ExperimentReport rep = to_report(m);
    rep.name = "moments[N=" + std::to_string(N) + "]";
    art.metrics("moments_N" + std::to_string(N) + ".csv", rep.metrics);
    Series s{"N = " + std::to_string(N), {}, {}};
    for (const auto& row : m.summary.rows) {
      s.x.push_back(row.t);
      s.y.push_back(row.x2);
    }
    series.push_back(std::move(s));
    sup_x2.push_back(m.summary.sup_x2);
    sup_l2.push_back(m.summary.sup_l2);
    reps.push_back(std::move(rep));
  }
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi > 0 ? (*hi - *lo) / *hi : 0.0;
  };
  ExperimentReport agree;
  agree.name = "moments-agreement";
  agree.metrics.columns = {"N", "sup_x2", "sup_bl2"};
  for (std::size_t j = 0; j < cfg.exp.Ns.size(); ++j)
    agree.metrics.add_row({static_cast<double>(cfg.exp.Ns[j]), sup_x2[j], sup_l2[j]});
  agree.check("x2 agreement", "sup E|X|^2 agrees across N within 20%", spread(sup_x2) <= 0.2, spread(sup_x2), 0.2);
  agree.check("bl2 agreement", "sup E||lambda||_BL^2 agrees across N within 20%", spread(sup_l2) <= 0.2,
              spread(sup_l2), 0.2);
  reps.push_back(std::move(agree));
  art.plot("moments.svg", {"second moment of positions", "t", "mean |x|^2"}, series);
  return reps;
}

}  // namespace

std::string manifest_text(const RunConfig& cfg, double wall_seconds) {
  std::ostringstream o;
  o << "# mflab " << kVersion << " run manifest\n";
  o << "# seed " << cfg.seed << "\n";
  o << "# streams: root seed -> splitmix64 key derivation over a path;\n";
  o << "#   {1, agent} position increments (counter step*d + coord), {2, replicate} initial law,\n";
  o << "#   {3, offset, h} label noise, {4, ...} probes, {5} random threshold, {6, ...} replicates\n";
  o << "# wall time " << format_double(wall_seconds) << " s\n";
  o << config_to_text(cfg);
  return o.str();
}

RunOutcome run(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  Artifacts art(cfg, outcome);
  auto timed = [&](auto&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = body();
    r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    outcome.reports.push_back(std::move(r));
  };
  switch (cfg.mode) {
    case Mode::Simulate: timed([&] { return run_simulate(cfg, art); }); break;
    case Mode::Spiking: timed([&] { return run_spiking(cfg, art); }); break;
    case Mode::Converge: timed([&] { return run_converge(cfg, art); }); break;
    case Mode::Stability: timed([&] { return run_stability(cfg, art); }); break;
    case Mode::Weakform: timed([&] { return run_weakform(cfg, art); }); break;
    case Mode::Picard: timed([&] { return run_picard(cfg, art); }); break;
    case Mode::Moments:
      for (auto& r : run_moments(cfg, art)) outcome.reports.push_back(std::move(r));
      break;
  }
  if (cfg.mode != Mode::Moments) art.metrics("metrics.csv", outcome.reports.front().metrics);
  art.write("report.txt", [&](std::ostream& o) {
    for (const auto& r : outcome.reports) write_report_text(o, r);
  });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  art.write("manifest.cfg", [&](std::ostream& o) { o << manifest_text(cfg, wall); });
  for (const auto& r : outcome.reports) write_report_text(log, r);
  return outcome;
}

}  // namespace mflab
