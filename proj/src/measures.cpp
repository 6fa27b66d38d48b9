#include "mflab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mflab/errors.hpp"

namespace mflab {

LabelMeasure::LabelMeasure(LabelSpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), w_(std::move(weights)) {
  if (!space_) throw UsageError("label measure needs a label space");
  if (w_.size() != space_->size()) throw UsageError("label measure size does not match its label space");
  for (double v : w_)
    if (!std::isfinite(v)) throw InvariantError("label measure has a non-finite weight");
}

LabelMeasure LabelMeasure::probability(LabelSpacePtr space, std::vector<double> weights) {
  LabelMeasure m(std::move(space), std::move(weights));
  repair_probability(m.w_);
  return m;
}

LabelMeasure LabelMeasure::dirac(LabelSpacePtr space, std::size_t atom) {
  std::vector<double> w(space->size(), 0.0);
  if (atom >= w.size()) throw UsageError("dirac: atom index out of range");
  w[atom] = 1.0;
  return {std::move(space), std::move(w)};
}

LabelMeasure LabelMeasure::uniform(LabelSpacePtr space) {
  const std::size_t k = space->size();
  return {std::move(space), std::vector<double>(k, 1.0 / static_cast<double>(k))};
}

LabelMeasure LabelMeasure::zero(LabelSpacePtr space) {
  const std::size_t k = space->size();
  return {std::move(space), std::vector<double>(k, 0.0)};
}

double LabelMeasure::total_mass() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

bool LabelMeasure::is_probability(double tol) const {
  for (double v : w_)
    if (v < 0.0) return false;
  return std::abs(total_mass() - 1.0) <= tol;
}

bool LabelMeasure::is_zero_mass(double tol) const { return std::abs(total_mass()) <= tol; }

double LabelMeasure::mean_coord() const {
  double s = 0.0;
  for (std::size_t k = 0; k < w_.size(); ++k) s += w_[k] * space_->coord(k);
  return s;
}

namespace {
void require_same_space(const LabelMeasure& a, const LabelMeasure& b) {
  if (a.space() != b.space()) throw UsageError("label measures live on different label spaces");
}
}  // namespace

LabelMeasure& LabelMeasure::operator+=(const LabelMeasure& o) {
  require_same_space(*this, o);
  for (std::size_t k = 0; k < w_.size(); ++k) w_[k] += o.w_[k];
  return *this;
}

LabelMeasure& LabelMeasure::operator-=(const LabelMeasure& o) {
  require_same_space(*this, o);
  for (std::size_t k = 0; k < w_.size(); ++k) w_[k] -= o.w_[k];
  return *this;
}

LabelMeasure& LabelMeasure::operator*=(double s) {
  for (double& v : w_) v *= s;
  return *this;
}

LabelMeasure operator+(LabelMeasure a, const LabelMeasure& b) { return a += b; }
LabelMeasure operator-(LabelMeasure a, const LabelMeasure& b) { return a -= b; }
LabelMeasure operator*(double s, LabelMeasure a) { return a *= s; }

void repair_probability(std::span<double> w, double tol) {
  bool clamped = false;
  for (double& v : w) {
    if (v < 0.0) {
      if (v < -tol) throw InvariantError("probability weight below -tolerance");
      v = 0.0;
      clamped = true;
    }
  }
  const double mass = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(mass - 1.0) > tol) {
    if (!clamped || std::abs(mass - 1.0) > static_cast<double>(w.size()) * tol)
      throw InvariantError("probability weights do not sum to 1");
  }
  if (clamped)
    for (double& v : w) v /= mass;
}

double tv_norm(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double tv_norm(const LabelMeasure& sigma) { return tv_norm(sigma.weights()); }

BlNormEvaluator::BlNormEvaluator(const LabelSpace& space) {
  // Variables psi_i = phi_i + 1 in [0, 2].
  const std::size_t k = space.size();
  program_.n_vars = k;
  program_.objective.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> row(k, 0.0);
    row[i] = 1.0;
    program_.add(std::move(row), lp::Relation::LessEq, 2.0);
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j || space.dist(i, j) >= 2.0) continue;  // implied by the bounds
      std::vector<double> row(k, 0.0);
      row[i] = 1.0;
      row[j] = -1.0;
      program_.add(std::move(row), lp::Relation::LessEq, space.dist(i, j));
    }
  }
}

double BlNormEvaluator::operator()(std::span<const double> w) const {
  lp::Program p = program_;
  p.objective.assign(w.begin(), w.end());
  const lp::Result r = lp::solve(p);
  if (r.status != lp::Status::Optimal) throw InternalError("BL norm program not solved to optimality");
  const double mass = std::accumulate(w.begin(), w.end(), 0.0);
  return std::max(0.0, r.value - mass);
}

double bl_norm_lp(const LabelSpace& space, std::span<const double> w) {
  if (w.size() != space.size()) throw UsageError("bl_norm: weight vector size mismatch");
  return space.bl_evaluator()(w);
}

double bl_norm(const LabelSpace& space, std::span<const double> w) {
  if (w.size() != space.size()) throw UsageError("bl_norm: weight vector size mismatch");
  bool nonneg = true, nonpos = true;
  double mass = 0.0;
  for (double v : w) {
    nonneg = nonneg && v >= 0.0;
    nonpos = nonpos && v <= 0.0;
    mass += v;
  }
  // phi = +-1 attains the total variation, which bounds the BL norm.
  if (nonneg || nonpos) return std::abs(mass);

  // Zero mass on a line of diameter <= 2: the |phi| <= 1 bound is inactive
  // and the norm is the Kantorovich integral of the cumulative mass.
  if (space.is_line_metric() && space.diameter() <= 2.0 && std::abs(mass) <= kMassTol * tv_norm(w) + 1e-300) {
    const auto order = space.coord_order();
    double cum = 0.0, total = 0.0;
    for (std::size_t r = 0; r + 1 < order.size(); ++r) {
      cum += w[order[r]];
      total += std::abs(cum) * (space.coord(order[r + 1]) - space.coord(order[r]));
    }
    return total;
  }
  return bl_norm_lp(space, w);
}

double bl_norm(const LabelMeasure& sigma) { return bl_norm(*sigma.space(), sigma.weights()); }

double w1_labels(const LabelMeasure& mu1, const LabelMeasure& mu2) {
  if (mu1.space() != mu2.space()) throw UsageError("w1_labels: measures on different label spaces");
  const LabelSpace& space = *mu1.space();
  const std::size_t k = space.size();
  if (std::equal(mu1.weights().begin(), mu1.weights().end(), mu2.weights().begin())) return 0.0;

  lp::Program p;
  p.n_vars = k * k;
  p.objective.resize(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) p.objective[i * k + j] = -space.dist(i, j);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> row(k * k, 0.0);
    for (std::size_t j = 0; j < k; ++j) row[i * k + j] = 1.0;
    p.add(std::move(row), lp::Relation::Equal, mu1[i]);
  }
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> row(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) row[i * k + j] = 1.0;
    p.add(std::move(row), lp::Relation::Equal, mu2[j]);
  }
  const lp::Result r = lp::solve(p);
  if (r.status != lp::Status::Optimal) throw InternalError("label transport program not solved");
  return std::max(0.0, -r.value);
}

void relax_toward(std::span<const double> lambda, std::span<const double> g, double rho,
                  std::span<double> out) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw UsageError("relax_toward: rho must lie in [0, 1]");
  for (std::size_t k = 0; k < lambda.size(); ++k) out[k] = lambda[k] + rho * (g[k] - lambda[k]);
}

LabelMeasure relax_toward(const LabelMeasure& lambda, const LabelMeasure& g, double rho) {
  if (lambda.space() != g.space()) throw UsageError("relax_toward: measures on different label spaces");
  std::vector<double> out(lambda.size());
  relax_toward(lambda.weights(), g.weights(), rho, out);
  for (double& v : out)
    if (v < 0.0 && v >= -kMassTol) v = 0.0;
  return LabelMeasure(lambda.space(), std::move(out));
}

}  // namespace mflab
