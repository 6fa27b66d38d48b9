#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mflab/config.hpp"
#include "mflab/csv_io.hpp"
#include "mflab/errors.hpp"
#include "mflab/initial_law.hpp"
#include "mflab/report.hpp"
#include "mflab/run.hpp"
#include "mflab/spiking.hpp"

using namespace mflab;
namespace fs = std::filesystem;

namespace {

const char* kLinear = R"(
[labels]
atoms = 0, 0.5, 1

[field]
kind = linear
a = 0.5
b = 0.3
c = 0.2
d = 0.4
e = 0.2
f = 0.1
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mflab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text.find("[run]") == std::string::npos ? "[run]\nmode = simulate\n" + text : text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

Trajectory small_trajectory(bool noise) {
  auto s = LabelSpace::line({0, 0.5, 1});
  SimConfig cfg;
  cfg.N = 5;
  cfg.dt = 0.1;
  cfg.T = 0.5;
  cfg.sigma = 0.1;
  cfg.seed = 8;
  cfg.record_noise = noise;
  cfg.field = make_field("linear", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}, {"d", 0.4}, {"e", 0.2}, {"f", 0.1}}, s);
  return simulate(cfg, sample_initial(InitialLaw{}, s, 5, 1, 8));
}

}  // namespace

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0, 123456789.123})
    CHECK(parse_double(format_double(v)) == v);
}

TEST_CASE("trajectory csv is a write-read-write fixpoint") {
  const auto traj = small_trajectory(true);
  std::ostringstream a;
  write_trajectory_csv(a, traj);
  std::istringstream in(a.str());
  auto back = read_trajectory_csv(in, traj.states.front().space());
  std::ostringstream na;
  write_noise_csv(na, traj);
  std::istringstream nin(na.str());
  read_noise_csv(nin, back);
  std::ostringstream b, nb;
  write_trajectory_csv(b, back);
  write_noise_csv(nb, back);
  CHECK(a.str() == b.str());
  CHECK(na.str() == nb.str());
  CHECK(back.states.size() == traj.states.size());
  CHECK(back.states.back().positions()[3] == traj.states.back().positions()[3]);
}

TEST_CASE("raster, rates, measures and metrics csv fixpoints") {
  SpikeRecord rec;
  rec.n_agents = 3;
  rec.dt = 0.01;
  rec.T = 0.5;
  rec.X_F = 0.7;
  rec.spikes = {{0, 3, 0.03, 0.001}, {2, 3, 0.03, 0.002}, {1, 40, 0.4, 1.0 / 3.0}};
  std::ostringstream a, b;
  write_raster_csv(a, rec);
  std::istringstream in(a.str());
  write_raster_csv(b, read_raster_csv(in, 3, 0.01, 0.5, 0.7));
  CHECK(a.str() == b.str());

  const auto rates = raster_and_rates(rec, 0.1);
  std::ostringstream r1, r2;
  write_rates_csv(r1, rates);
  std::istringstream rin(r1.str());
  write_rates_csv(r2, read_rates_csv(rin));
  CHECK(r1.str() == r2.str());

  auto s = LabelSpace::line({0, 0.5, 1});
  std::vector<LabelMeasure> ms{LabelMeasure::uniform(s), LabelMeasure(s, {0.1, -0.3, 0.2})};
  std::ostringstream m1, m2;
  write_measures_csv(m1, ms);
  std::istringstream min(m1.str());
  write_measures_csv(m2, read_measures_csv(min, s));
  CHECK(m1.str() == m2.str());

  MetricsTable t;
  t.columns = {"N", "w1"};
  t.add_row({25, 0.125});
  t.add_row({50, 1.0 / 7.0});
  std::ostringstream t1, t2;
  write_metrics_csv(t1, t);
  std::istringstream tin(t1.str());
  write_metrics_csv(t2, read_metrics_csv(tin));
  CHECK(t1.str() == t2.str());
  CHECK(t.at(1, "w1") == 1.0 / 7.0);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config_text(std::string("[run]\nmode = simulate\n[sim]\nN = 7\n") + kLinear);
  CHECK(cfg.mode == Mode::Simulate);
  CHECK(cfg.sim.N == 7);
  CHECK(cfg.space->size() == 3);
  CHECK(cfg.sim.field->name() == "linear");
  CHECK(!cfg.sim.theta);

  const auto spike = parse_config("configs/spiking_population.cfg");
  CHECK(spike.mode == Mode::Spiking);
  CHECK(spike.has_spike);
  CHECK(spike.X_F == 0.7);
  CHECK(spike.sim.N == 1000);
  CHECK_NOTHROW(spike.spike_config().validate());

  CHECK(error_of(std::string("[run]\nmode = spiking\n[sim]\nN = 3\n[spike]\nX_F = 0.5\nX_R = 0.6\n") + kLinear)
            .find("X_R") != std::string::npos);
  const auto unknown_key = error_of(std::string("[sim]\nN = 3\nfoo = 1\n") + kLinear);
  CHECK(unknown_key.find("t.cfg:5") != std::string::npos);
  CHECK(unknown_key.find("sim.foo") != std::string::npos);
  CHECK(error_of(std::string("[bogus]\n") + kLinear).find("bogus") != std::string::npos);
  CHECK(error_of(std::string("[sim]\nN = 3\nN = 4\n") + kLinear).find("t.cfg:5") != std::string::npos);
  CHECK(error_of(std::string("[sim]\nN = -3\n") + kLinear).find("sim.N") != std::string::npos);
  CHECK(error_of(std::string("[sim]\nN = 3\ndt = abc\n") + kLinear).find("sim.dt") != std::string::npos);
  CHECK(!error_of("[sim]\nN = 3\n[labels]\natoms = 0, 1\n[field]\nkind = linear\ng = 2\n").empty());
  CHECK(!error_of("[sim]\nN = 3\n[labels]\natoms = 0, 1\n[field]\nkind = missing\n").empty());
  CHECK_THROWS_AS(parse_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("canonical text parses back to the same canonical text") {
  for (const char* p : {"configs/spiking_population.cfg", "configs/simulate_small.cfg", "configs/converge.cfg",
                        "configs/picard.cfg", "configs/stability.cfg", "configs/moments.cfg",
                        "configs/weakform_coarse.cfg"}) {
    const auto text = config_to_text(parse_config(p));
    CHECK(config_to_text(parse_config_text(text)) == text);
  }
}

TEST_CASE("simulate run writes the trajectory and a replayable manifest") {
  auto cfg = parse_config("configs/simulate_small.cfg");
  const auto dir1 = scratch("sim1"), dir2 = scratch("sim2");
  cfg.out_dir = dir1.string();
  std::ostringstream log;
  const auto outcome = run(cfg, log);
  CHECK(outcome.passed());
  const auto csv = slurp(dir1 / "trajectory.csv");
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + 10 * (100 + 1));
  CHECK(fs::exists(dir1 / "manifest.cfg"));
  CHECK(fs::exists(dir1 / "report.txt"));

  auto replay = parse_config((dir1 / "manifest.cfg").string());
  replay.out_dir = dir2.string();
  CHECK(run(replay, log).passed());
  CHECK(slurp(dir2 / "trajectory.csv") == csv);
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("spiking and converge runs produce their tables") {
  auto spike = parse_config_text(std::string(R"(
[run]
mode = spiking
seed = 3
[sim]
N = 50
dt = 0.001
T = 1
sigma = 0.005
record_every = 10
[spike]
X_F = 0.7
X_R = 0.01
)") + kLinear);
  const auto d1 = scratch("spk");
  spike.out_dir = d1.string();
  std::ostringstream log;
  run(spike, log);
  const auto raster = slurp(d1 / "raster.csv");
  CHECK(std::count(raster.begin(), raster.end(), '\n') > 1);
  CHECK(fs::exists(d1 / "rates.csv"));

  auto conv = parse_config_text(std::string(R"(
[run]
mode = converge
seed = 4
[sim]
N = 40
dt = 0.05
T = 0.5
sigma = 0.005
[experiment]
Ns = 5, 10, 20, 40
n_reps = 2
)") + kLinear);
  const auto d2 = scratch("conv");
  conv.out_dir = d2.string();
  run(conv, log);
  std::ifstream m(d2 / "metrics.csv");
  const auto table = read_metrics_csv(m);
  std::set<double> Ns;
  for (std::size_t r = 0; r < table.rows.size(); ++r) Ns.insert(table.at(r, "N"));
  CHECK(Ns.size() == 4);
  fs::remove_all(d1);
  fs::remove_all(d2);
}
