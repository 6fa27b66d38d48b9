#include "mflab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mflab/errors.hpp"
#include "mflab/initial_law.hpp"
#include "mflab/rng.hpp"
#include "mflab/wasserstein.hpp"

namespace mflab {

namespace {

struct Sampler {
  const ProbeDomain& dom;
  std::mt19937_64 gen;

  double xmax() const { return std::max(dom.radius - 1.0, 0.0); }

  void position(std::span<double> x) {
    // uniform in the cube, then pulled into the ball
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : x) v = u(gen) * xmax();
    const double n = euclidean_norm(x);
    if (n > xmax() && n > 0)
      for (double& v : x) v *= xmax() / n;
  }

  // alternate concentrations so that near-boundary labels are common
  void labels(std::span<double> w) {
    const double alphas[] = {1.0, 0.3, 3.0};
    sample_dirichlet(gen, alphas[std::uniform_int_distribution<int>(0, 2)(gen)], w);
  }

  AgentState agent() {
    AgentState a{std::vector<double>(dom.dim), LabelMeasure::zero(dom.space)};
    position(a.x);
    std::vector<double> w(dom.space->size());
    labels(w);
    a.lambda = LabelMeasure(dom.space, std::move(w));
    return a;
  }

  EmpiricalMeasure population() {
    const std::size_t K = dom.space->size();
    std::vector<double> x(dom.psi_size * dom.dim), l(dom.psi_size * K);
    for (std::size_t i = 0; i < dom.psi_size; ++i) {
      position(std::span<double>(x).subspan(i * dom.dim, dom.dim));
      labels(std::span<double>(l).subspan(i * K, K));
    }
    return EmpiricalMeasure(dom.space, dom.dim, std::move(x), std::move(l));
  }

  // small perturbation of a state that stays inside the ball
  AgentState nearby(const AgentState& a, double scale) {
    AgentState b = a;
    std::normal_distribution<double> n(0.0, scale);
    const int mode = std::uniform_int_distribution<int>(0, 2)(gen);
    if (mode != 1) {
      for (double& v : b.x) v += n(gen);
      const double nx = euclidean_norm(b.x);
      if (nx > xmax() && nx > 0)
        for (double& v : b.x) v *= xmax() / nx;
    }
    if (mode != 0) {
      std::vector<double> w(dom.space->size());
      labels(w);
      const double s = std::min(1.0, std::abs(n(gen)));
      auto lw = b.lambda.weights();
      for (std::size_t k = 0; k < w.size(); ++k) lw[k] = (1 - s) * lw[k] + s * w[k];
    }
    return b;
  }
};

void validate(const ProbeDomain& dom) {
  if (!dom.space) throw UsageError("probe domain needs a label space");
  if (!(dom.radius > 0)) throw UsageError("probe radius must be > 0");
  if (dom.dim == 0 || dom.psi_size == 0) throw UsageError("probe domain needs d >= 1 and psi_size >= 1");
}

double norm_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double bl_diff(const LabelSpace& space, std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return bl_norm(space, d);
}

}  // namespace

LipschitzEstimate probe_lipschitz(const FieldPair& fp, const ProbeDomain& dom, std::size_t n_samples,
                                  std::uint64_t seed) {
  validate(dom);
  if (n_samples < 2) throw UsageError("probe_lipschitz needs n_samples >= 2");
  const LabelSpace& space = *dom.space;
  const std::size_t K = space.size(), d = dom.dim;
  LipschitzEstimate est;
  std::vector<double> v1(d), v2(d), v3(d), t1(K), t2(K), t3(K);
  for (std::size_t j = 0; j < n_samples; ++j) {
    Sampler s{dom, std::mt19937_64(rng::derive(seed, {rng::kProbe, 1, j}))};
    const bool local = j % 2 == 1;
    const EmpiricalMeasure psi1 = s.population();
    EmpiricalMeasure psi2 = psi1;
    if (local) {
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, dom.psi_size - 1)(s.gen);
      const AgentState moved = s.nearby(psi1.state(i), 0.05);
      std::copy(moved.x.begin(), moved.x.end(), psi2.x_of(i).begin());
      std::copy(moved.lambda.weights().begin(), moved.lambda.weights().end(), psi2.lambda_of(i).begin());
    } else {
      psi2 = s.population();
    }
    const AgentState y1 = s.agent();
    const AgentState y2 = local ? s.nearby(y1, 0.05) : s.agent();

    auto b1 = fp.bind(psi1);
    auto b2 = fp.bind(psi2);
    b1->velocity(y1.ref(), v1);
    b1->velocity(y2.ref(), v2);
    b2->velocity(y2.ref(), v3);
    b1->label_drift(y1.ref(), t1);
    b1->label_drift(y2.ref(), t2);
    b2->label_drift(y2.ref(), t3);

    const double dy = energy_distance(space, y1.ref(), y2.ref());
    const double dpsi = w1_product(psi1, psi2);
    if (dy > 0) {
      est.L_v = std::max(est.L_v, norm_diff(v1, v2) / dy);
      est.L_T = std::max(est.L_T, bl_diff(space, t1, t2) / dy);
    }
    if (dpsi > 0) {
      est.L_v = std::max(est.L_v, norm_diff(v2, v3) / dpsi);
      est.L_T = std::max(est.L_T, bl_diff(space, t2, t3) / dpsi);
    }
    if (dy + dpsi > 0) {
      est.L_v = std::max(est.L_v, norm_diff(v1, v3) / (dy + dpsi));
      est.L_T = std::max(est.L_T, bl_diff(space, t1, t3) / (dy + dpsi));
    }
  }
  return est;
}

GrowthEstimate probe_growth(const FieldPair& fp, const ProbeDomain& dom, std::size_t n_samples,
                            std::uint64_t seed) {
  validate(dom);
  if (n_samples < 1) throw UsageError("probe_growth needs n_samples >= 1");
  const LabelSpace& space = *dom.space;
  GrowthEstimate est;
  std::vector<double> v(dom.dim), t(space.size());
  for (std::size_t j = 0; j < n_samples; ++j) {
    Sampler s{dom, std::mt19937_64(rng::derive(seed, {rng::kProbe, 2, j}))};
    const EmpiricalMeasure psi = s.population();
    const AgentState y = s.agent();
    auto b = fp.bind(psi);
    b->velocity(y.ref(), v);
    b->label_drift(y.ref(), t);
    const double m1 = psi.first_moment();
    const double ny = energy_norm(space, y.ref());
    est.M_v = std::max(est.M_v, euclidean_norm(v) / (1 + ny + m1));
    est.M_T = std::max(est.M_T, bl_norm(space, t) / (1 + euclidean_norm(y.x) + m1));
  }
  return est;
}

double probe_delta(const FieldPair& fp, const ProbeDomain& dom, std::size_t n_samples, std::uint64_t seed) {
  validate(dom);
  const LabelSpace& space = *dom.space;
  double worst = 0;
  std::vector<double> t(space.size());
  for (std::size_t j = 0; j < n_samples; ++j) {
    Sampler s{dom, std::mt19937_64(rng::derive(seed, {rng::kProbe, 3, j}))};
    const EmpiricalMeasure psi = s.population();
    const AgentState y = s.agent();
    fp.bind(psi)->label_drift(y.ref(), t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double l = y.lambda[k];
      if (l >= 1e-6) worst = std::max(worst, -t[k] / l);
    }
  }
  return 2 * worst;
}

double positivity_margin(const FieldPair& fp, const ProbeDomain& dom, std::uint64_t seed,
                         std::size_t n_samples) {
  validate(dom);
  if (auto a = fp.analytic_delta(*dom.space, dom.radius)) return *a;
  return probe_delta(fp, dom, n_samples, seed);
}

}  // namespace mflab
