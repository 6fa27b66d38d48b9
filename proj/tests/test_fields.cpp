#include "doctest.h"

#include "mflab/errors.hpp"
#include "mflab/fields.hpp"
#include "mflab/probes.hpp"
#include "oracles.hpp"

using namespace mflab;

namespace {

const LinearFieldParams kReference{0.5, 0.3, 0.2, 0.4, 0.2, 0.1, 0.0};

EmpiricalMeasure ensemble(const LabelSpacePtr& s, std::vector<double> x, std::vector<std::vector<double>> l) {
  std::vector<double> flat;
  for (auto& w : l) flat.insert(flat.end(), w.begin(), w.end());
  return EmpiricalMeasure(s, 1, std::move(x), std::move(flat));
}

class ConstantField final : public FieldPair {
 public:
  ConstantField(double v, std::vector<double> t) : v_(v), t_(std::move(t)) {}
  std::unique_ptr<BoundField> bind(const EmpiricalMeasure&) const override {
    struct B final : BoundField {
      using BoundField::label_drift;
      double v;
      std::vector<double> t;
      void velocity(AgentRef, std::span<double> out) const override { std::fill(out.begin(), out.end(), v); }
      void label_drift(AgentRef, std::span<const double>, std::span<double> out) const override {
        std::copy(t.begin(), t.end(), out.begin());
      }
    };
    auto b = std::make_unique<B>();
    b->v = v_;
    b->t = t_;
    return b;
  }
  std::string name() const override { return "constant"; }

 private:
  double v_;
  std::vector<double> t_;
};

}  // namespace

TEST_CASE("linear velocity examples") {
  auto s = LabelSpace::line({0, 0.5, 1});
  const auto centered = ensemble(s, {-1, 1}, {{1, 0, 0}, {1, 0, 0}});
  std::vector<double> x0{0}, d0{1, 0, 0};
  CHECK(linear_velocity(kReference, AgentRef{x0, d0}, centered) == doctest::Approx(0.0));

  const auto at_one = ensemble(s, {1, 1}, {{1, 0, 0}, {0, 1, 0}});
  std::vector<double> x1{1};
  CHECK(linear_velocity(kReference, AgentRef{x1, d0}, at_one) == doctest::Approx(0.7));

  LinearFieldParams id{1, 0, 0, 0, 0, 0, 0};
  std::mt19937_64 g(1);
  const auto psi = oracle::random_ensemble(g, s, 6, 1);
  for (std::size_t i = 0; i < psi.size(); ++i)
    CHECK(linear_velocity(id, psi.agent(i), psi) == doctest::Approx(psi.agent(i).x[0]));
}

TEST_CASE("linear label operator: zero mass, centering, gate") {
  auto s = LabelSpace::line({0, 0.5, 1});
  std::mt19937_64 g(2);
  const auto psi = oracle::random_ensemble(g, s, 9, 1);
  const LinearFieldParams zero{};
  for (std::size_t i = 0; i < psi.size(); ++i) CHECK(tv_norm(linear_label_op(zero, psi.agent(i), psi)) == 0.0);

  for (double margin : {0.0, 0.05, 1.0}) {
    double avg = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const auto t = linear_label_op(kReference, psi.agent(i), psi, margin);
      CHECK(t.is_zero_mass(1e-14));
      avg += t.mean_coord();
    }
    // the ungated operator is centered over the population exactly
    if (margin == 0.0) CHECK(std::abs(avg / psi.size()) < 1e-10);
  }

  // the gate keeps lambda + theta T nonnegative for theta * delta <= 1
  LinearField f(kReference);
  const double delta = *f.analytic_delta(*s, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pop = oracle::random_ensemble(g, s, 5, 1);
    std::vector<double> x(5);
    for (std::size_t i = 0; i < 5; ++i) x[i] = std::clamp(pop.agent(i).x[0], -2.0, 2.0);
    std::vector<double> lam(pop.labels().begin(), pop.labels().end());
    const EmpiricalMeasure inside(s, 1, x, lam);
    for (std::size_t i = 0; i < inside.size(); ++i) {
      const auto t = evaluate_label_drift(f, inside.agent(i), inside);
      for (std::size_t k = 0; k < s->size(); ++k) CHECK(t[k] + delta * inside.agent(i).lambda[k] >= -1e-10);
    }
  }
}

TEST_CASE("kernel label operator examples") {
  auto s = LabelSpace::line({0, 1});
  const auto psi = ensemble(s, {0.2, 0.7, 1.5}, {{1, 0}, {0.5, 0.5}, {0, 1}});
  std::vector<double> x{0}, l{0.5, 0.5};
  const AgentRef y{x, l};

  KernelOperatorSpec zero{"zero", [](std::size_t, double, AgentRef) { return 0.0; }, {}, 0.0};
  CHECK(tv_norm(kernel_label_op(zero, y, psi)) == 0.0);

  KernelOperatorSpec flat{"flat", [](std::size_t, double, AgentRef) { return 2.5; }, {}, 0.0};
  CHECK(tv_norm(kernel_label_op(flat, y, psi)) == doctest::Approx(0.0));

  KernelOperatorSpec pm{"pm", [](std::size_t k, double, AgentRef z) { return k == 0 ? z.x[0] : -z.x[0]; }, {}, 0.0};
  const double m = psi.mean_position(0);
  const auto t = kernel_label_op(pm, y, psi);
  CHECK(t[0] == doctest::Approx(m));
  CHECK(t[1] == doctest::Approx(-m));
  CHECK(kernel_centering_residual(pm, psi) == doctest::Approx(0.0));

  // a gated kernel stays zero mass and shrinks outflow from an empty atom
  KernelOperatorSpec gated = pm;
  gated.boundary_margin = 0.5;
  std::vector<double> empty{1, 0}, full{0, 1};
  CHECK(kernel_label_op(gated, AgentRef{x, empty}, psi).is_zero_mass(1e-14));
  CHECK(tv_norm(kernel_label_op(gated, AgentRef{x, empty}, psi)) == doctest::Approx(0.0));
  CHECK(tv_norm(kernel_label_op(gated, AgentRef{x, full}, psi)) == doctest::Approx(2 * m));
}

TEST_CASE("field registry") {
  auto s = LabelSpace::line({0, 0.5, 1});
  CHECK(field_registered("linear"));
  CHECK(field_registered("kernel-moment"));
  CHECK_THROWS_AS(make_field("nope", {}, s), ConfigError);
  CHECK_THROWS_AS(make_field("linear", {{"g", 1.0}}, s), ConfigError);
  CHECK_THROWS_AS(make_field("kernel-moment", {{"d", 1.0}}, s), ConfigError);
  auto k = make_field("kernel-moment", {{"w_x", 0.5}, {"beta2", 2.0}}, s);
  CHECK(k->name() == "kernel-moment");
  CHECK(k->accepts_signed_labels());
  register_field("test-constant", [](const FieldParams& p, const LabelSpacePtr& sp) -> FieldPtr {
    return std::make_shared<ConstantField>(p.count("v") ? p.at("v") : 0.0, std::vector<double>(sp->size(), 0.0));
  });
  CHECK(field_registered("test-constant"));
  CHECK(make_field("test-constant", {{"v", 2.0}}, s)->name() == "constant");
}

TEST_CASE("probes: constant and linear fields") {
  auto s = LabelSpace::line({0, 0.5, 1});
  ProbeDomain dom{s, 1, 3.0, 6};
  ConstantField c(1.5, {0, 0, 0});
  const auto lc = probe_lipschitz(c, dom, 200, 5);
  CHECK(lc.L_v == 0.0);
  CHECK(lc.L_T == 0.0);
  const auto gc = probe_growth(c, dom, 200, 5);
  CHECK(gc.M_v <= 1.5);
  CHECK(gc.M_v >= 1.5 / (1 + 2 * (dom.radius + 1)));
  CHECK(gc.M_T == 0.0);
  ConstantField z(0.0, {0, 0, 0});
  const auto gz = probe_growth(z, dom, 50, 5);
  CHECK(gz.M_v == 0.0);
  CHECK(gz.M_T == 0.0);

  LinearField lin(LinearFieldParams{0.5, 0, 0, 0, 0, 0, 0});
  double prev = 0;
  for (std::size_t n : {10, 50, 200, 800}) {
    const auto l = probe_lipschitz(lin, dom, n, 9);
    CHECK(l.L_v <= 0.5 + 1e-12);
    CHECK(l.L_v >= prev);
    prev = l.L_v;
  }
  CHECK(prev > 0.45);

  LinearField reference(kReference);
  const auto gp = probe_growth(reference, dom, 200, 3);
  CHECK(std::isfinite(gp.M_v));
  CHECK(std::isfinite(gp.M_T));
  CHECK(gp.M_v > 0);
}

TEST_CASE("positivity margin: analytic value bounds the probe") {
  auto s = LabelSpace::line({0, 0.5, 1});
  LinearField f(kReference, 0.2);
  for (double R : {1.5, 2.0, 3.0}) {
    ProbeDomain dom{s, 1, R, 6};
    const double analytic = *f.analytic_delta(*s, R);
    // the probe doubles its observed max, so half of it must stay below the exact margin
    CHECK(probe_delta(f, dom, 400, 1) / 2 <= analytic + 1e-12);
    CHECK(positivity_margin(f, dom, 1) == analytic);
  }
  auto k = make_field("kernel-moment", {{"w_x", 1.0}, {"margin", 0.3}}, s);
  ProbeDomain dom{s, 1, 2.0, 6};
  CHECK(!k->analytic_delta(*s, 2.0));
  CHECK(positivity_margin(*k, dom, 1) == probe_delta(*k, dom, 256, 1));
}
