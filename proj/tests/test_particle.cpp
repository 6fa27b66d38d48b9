#include <cmath>

#include "doctest.h"
#include "fn_field.hpp"
#include "mflab/errors.hpp"
#include "mflab/initial_law.hpp"
#include "mflab/particle.hpp"
#include "mflab/rng.hpp"
#include "oracles.hpp"

using namespace mflab;
using fixture::FnField;

namespace {

EmpiricalMeasure single(const LabelSpacePtr& s, double x, std::vector<double> l) {
  return EmpiricalMeasure(s, 1, {x}, std::move(l));
}

std::shared_ptr<FnField> ou_field() {
  return std::make_shared<FnField>([](AgentRef y, std::span<double> o) { o[0] = -y.x[0]; },
                                   [](AgentRef, std::span<double> o) { std::ranges::fill(o, 0.0); }, 0.0);
}

}  // namespace

TEST_CASE("one step with constant label drift") {
  auto s = LabelSpace::line({0, 1});
  auto f = std::make_shared<FnField>([](AgentRef, std::span<double> o) { o[0] = 0; },
                                     [](AgentRef, std::span<double> o) {
                                       o[0] = -0.5;
                                       o[1] = 0.5;
                                     });
  const auto in = single(s, 0.0, {1, 0});
  auto out = in;
  std::vector<double> noise{0.0};
  step(in, *f, StepParams{0.01, 0, 1}, noise, out);
  CHECK(out.agent(0).lambda[0] == doctest::Approx(std::exp(-0.01) + (1 - std::exp(-0.01)) * 0.5).epsilon(1e-14));
  CHECK(out.agent(0).lambda[0] == doctest::Approx(0.995025).epsilon(1e-6));
  CHECK(out.agent(0).lambda[0] + out.agent(0).lambda[1] == doctest::Approx(1.0));
}

TEST_CASE("zero fields leave states unchanged without noise") {
  auto s = LabelSpace::line({0, 0.5, 1});
  std::mt19937_64 g(4);
  const auto in = oracle::random_ensemble(g, s, 12, 2);
  SimConfig cfg;
  cfg.N = 12;
  cfg.d = 2;
  cfg.dt = 0.01;
  cfg.T = 0.3;
  cfg.field = FnField::zero();
  const auto tr = simulate(cfg, in);
  const auto& last = tr.states.back();
  for (std::size_t i = 0; i < in.positions().size(); ++i) CHECK(last.positions()[i] == in.positions()[i]);
  for (std::size_t i = 0; i < in.labels().size(); ++i)
    CHECK(last.labels()[i] == doctest::Approx(in.labels()[i]).epsilon(1e-14));

  // label drift zero with noise: labels still frozen
  cfg.sigma = 0.3;
  const auto tr2 = simulate(cfg, in);
  for (std::size_t i = 0; i < in.labels().size(); ++i)
    CHECK(tr2.states.back().labels()[i] == doctest::Approx(in.labels()[i]).epsilon(1e-14));
}

TEST_CASE("parallel step matches serial reference bitwise") {
  auto s = LabelSpace::line({0, 0.5, 1});
  auto field = make_field("linear", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}, {"d", 0.4}, {"e", 0.2}, {"f", 0.1}}, s);
  const auto in = sample_initial(InitialLaw{}, s, 500, 1, 9);
  std::vector<double> noise(500);
  fill_noise(9, 0, 500, 1, 0.01, noise);
  auto a = in, b = in;
  const StepParams p{0.01, 0.2, 0.5};
  step(in, *field, p, noise, a);
  step_serial(in, *field, p, noise, b);
  for (std::size_t i = 0; i < in.positions().size(); ++i) CHECK(a.positions()[i] == b.positions()[i]);
  for (std::size_t i = 0; i < in.labels().size(); ++i) CHECK(a.labels()[i] == b.labels()[i]);
}

TEST_CASE("simulate is deterministic in the seed") {
  auto s = LabelSpace::line({0, 0.5, 1});
  SimConfig cfg;
  cfg.N = 40;
  cfg.dt = 0.01;
  cfg.T = 0.5;
  cfg.sigma = 0.1;
  cfg.seed = 17;
  cfg.field = make_field("linear", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}, {"d", 0.4}, {"e", 0.2}, {"f", 0.1}}, s);
  const auto init = sample_initial(InitialLaw{}, s, 40, 1, 17);
  const auto a = simulate(cfg, init), b = simulate(cfg, init);
  CHECK(a.theta == b.theta);
  for (std::size_t i = 0; i < 40; ++i) CHECK(a.states.back().positions()[i] == b.states.back().positions()[i]);
  cfg.seed = 18;
  const auto c = simulate(cfg, init);
  CHECK(c.states.back().positions()[0] != a.states.back().positions()[0]);
}

TEST_CASE("noise stream layout") {
  std::vector<double> row(6);
  fill_noise(3, 7, 3, 2, 0.04, row);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 2; ++c) CHECK(row[i * 2 + c] == brownian_increment(3, i, 7, c, 2, 0.04));
  CHECK(row[0] == doctest::Approx(0.2 * rng::normal(rng::derive(3, {rng::kBrownian, 0}), 14)));
}

TEST_CASE("linear decay matches the exponential to first order") {
  auto s = LabelSpace::line({0, 1});
  SimConfig cfg;
  cfg.N = 1;
  cfg.T = 1.0;
  cfg.field = ou_field();
  double prev_err = 0;
  for (double dt : {0.02, 0.01, 0.005}) {
    cfg.dt = dt;
    const auto tr = simulate(cfg, single(s, 1.0, {1, 0}));
    const double x = tr.states.back().positions()[0];
    CHECK(x == doctest::Approx(std::pow(1 - dt, 1.0 / dt)).epsilon(1e-10));
    const double err = std::abs(x - std::exp(-1.0));
    CHECK(err < dt);
    if (prev_err > 0) CHECK(prev_err / err == doctest::Approx(2.0).epsilon(0.05));
    prev_err = err;
  }
}

TEST_CASE("theta feasibility") {
  auto s = LabelSpace::line({0, 0.5, 1});
  SimConfig cfg;
  cfg.N = 1;
  cfg.dt = 0.01;
  cfg.T = 0.1;
  cfg.field = std::make_shared<FnField>([](AgentRef, std::span<double> o) { o[0] = 0; },
                                        [](AgentRef, std::span<double> o) { std::ranges::fill(o, 0.0); }, 4.0);
  const auto init = single(s, 0.0, {0.2, 0.3, 0.5});
  CHECK(resolve_theta(cfg, init) == doctest::Approx(0.25));
  cfg.theta = 0.25;
  CHECK(resolve_theta(cfg, init) == 0.25);
  cfg.theta = 0.5;
  CHECK_THROWS_AS(resolve_theta(cfg, init), ConfigError);
  cfg.theta.reset();
  cfg.field = FnField::zero();
  CHECK(resolve_theta(cfg, init) == kThetaCap);
  CHECK(stepper_radius(init) == doctest::Approx(1.0 + energy_norm(*s, init.agent(0))));

  // a drift that drains an empty atom makes g negative
  cfg.theta = 1.0;
  cfg.field = std::make_shared<FnField>([](AgentRef, std::span<double> o) { o[0] = 0; },
                                        [](AgentRef, std::span<double> o) {
                                          o[0] = -1;
                                          o[1] = 0;
                                          o[2] = 1;
                                        });
  CHECK_THROWS_AS(simulate(cfg, single(s, 0.0, {0.0, 0.5, 0.5})), ConfigError);
}

TEST_CASE("Picard iteration") {
  auto s = LabelSpace::line({0, 0.5, 1});
  SimConfig cfg;
  cfg.N = 20;
  cfg.dt = 0.01;
  cfg.T = 0.5;
  cfg.sigma = 0.0;
  cfg.field = FnField::zero();
  const auto init = sample_initial(InitialLaw{}, s, 20, 1, 5);
  const auto zero = picard_solve(cfg, init, 4);
  for (double v : zero.sup_diffs) CHECK(v == 0.0);

  cfg.sigma = 0.05;
  cfg.seed = 5;
  cfg.field = make_field("linear", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}, {"d", 0.4}, {"e", 0.2}, {"f", 0.1}}, s);
  cfg.theta = 0.5;
  const auto direct = simulate(cfg, init);
  const auto pic = picard_solve(cfg, init, 60);
  CHECK(pic.sup_diffs.back() < 1e-12);
  const auto& a = pic.trajectory.states.back();
  const auto& b = direct.states.back();
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(a.positions()[i] == doctest::Approx(b.positions()[i]).epsilon(1e-9));
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(a.agent(i).lambda[k] == doctest::Approx(b.agent(i).lambda[k]).epsilon(1e-9));
  }
}

TEST_CASE("pooled Brownian increments have the right mean and variance") {
  const double dt = 0.01;
  const std::size_t agents = 1000, steps = 1000, n = agents * steps;
  std::vector<double> row(agents);
  double sum = 0, sum2 = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    fill_noise(123, k, agents, 1, dt, row);
    for (double v : row) {
      sum += v;
      sum2 += v * v;
    }
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) <= 4 * std::sqrt(dt / n));
  CHECK(var == doctest::Approx(dt).epsilon(0.05));
}
