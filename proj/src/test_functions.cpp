#include "mflab/test_functions.hpp"

#include <cmath>

#include "mflab/errors.hpp"

namespace mflab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double coef(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 0.0; }

}  // namespace

double SpatialFn::value(std::span<const double> x) const {
  switch (kind) {
    case Kind::Constant: return c0;
    case Kind::Affine: {
      double s = c0;
      for (std::size_t i = 0; i < x.size(); ++i) s += coef(w, i) * x[i];
      return s;
    }
    case Kind::Quadratic: {
      double s = c0;
      for (std::size_t i = 0; i < x.size(); ++i) s += coef(w, i) * x[i] + coef(q, i) * x[i] * x[i];
      return s;
    }
    case Kind::Gaussian: {
      double r2 = 0;
      for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - coef(center, i)) * (x[i] - coef(center, i));
      return c0 * std::exp(-r2 / (2 * width * width));
    }
  }
  return 0;
}

void SpatialFn::gradient(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case Kind::Constant: out[i] = 0; break;
      case Kind::Affine: out[i] = coef(w, i); break;
      case Kind::Quadratic: out[i] = coef(w, i) + 2 * coef(q, i) * x[i]; break;
      case Kind::Gaussian: out[i] = -value(x) * (x[i] - coef(center, i)) / (width * width); break;
    }
  }
}

double SpatialFn::laplacian(std::span<const double> x) const {
  switch (kind) {
    case Kind::Constant:
    case Kind::Affine: return 0;
    case Kind::Quadratic: {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += 2 * coef(q, i);
      return s;
    }
    case Kind::Gaussian: {
      double r2 = 0;
      for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - coef(center, i)) * (x[i] - coef(center, i));
      const double s2 = width * width;
      return value(x) * (r2 / (s2 * s2) - static_cast<double>(x.size()) / s2);
    }
  }
  return 0;
}

double OuterFn::value(std::span<const double> p) const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Linear: return dot(coef, p);
    case Kind::Square: {
      const double s = dot(coef, p);
      return s * s;
    }
    case Kind::Exp: return std::exp(dot(coef, p));
  }
  return 0;
}

void OuterFn::gradient(std::span<const double> p, std::span<double> out) const {
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double c = j < coef.size() ? coef[j] : 0.0;
    switch (kind) {
      case Kind::One: out[j] = 0; break;
      case Kind::Linear: out[j] = c; break;
      case Kind::Square: out[j] = 2 * dot(coef, p) * c; break;
      case Kind::Exp: out[j] = std::exp(dot(coef, p)) * c; break;
    }
  }
}

void CylinderTestFunction::validate(const LabelSpace& space) const {
  if (psi_lip.size() != psis.size()) throw UsageError("test function '" + name + "': one Lipschitz constant per psi");
  if ((g.kind == OuterFn::Kind::Linear || g.kind == OuterFn::Kind::Square || g.kind == OuterFn::Kind::Exp) &&
      g.coef.size() != psis.size())
    throw UsageError("test function '" + name + "': g needs one coefficient per psi");
  for (std::size_t j = 0; j < psis.size(); ++j) {
    if (psis[j].size() != space.size()) throw UsageError("test function '" + name + "': psi has the wrong size");
    for (std::size_t a = 0; a < space.size(); ++a)
      for (std::size_t b = a + 1; b < space.size(); ++b)
        if (std::abs(psis[j][a] - psis[j][b]) > psi_lip[j] * space.dist(a, b) * (1 + 1e-12) + 1e-15)
          throw UsageError("test function '" + name + "': psi_" + std::to_string(j + 1) +
                           " exceeds its declared Lipschitz constant");
  }
}

std::vector<double> CylinderTestFunction::pairings(std::span<const double> lambda) const {
  std::vector<double> p(psis.size());
  for (std::size_t j = 0; j < psis.size(); ++j) p[j] = dot(psis[j], lambda);
  return p;
}

double CylinderTestFunction::value(std::span<const double> x, std::span<const double> lambda) const {
  return f.value(x) * g.value(pairings(lambda));
}

double generator_apply(const CylinderTestFunction& phi, AgentRef y, const BoundField& b, double sigma) {
  const std::size_t d = y.x.size(), K = y.lambda.size();
  const auto p = phi.pairings(y.lambda);
  const double gv = phi.g.value(p);
  const double fv = phi.f.value(y.x);
  std::vector<double> grad(d), v(d), dg(p.size()), t(K);
  phi.f.gradient(y.x, grad);
  b.velocity(y, v);
  double out = sigma * phi.f.laplacian(y.x) * gv + gv * dot(grad, v);
  if (!p.empty()) {
    phi.g.gradient(p, dg);
    bool any = false;
    for (double c : dg) any = any || c != 0.0;
    if (any) {
      b.label_drift(y, t);
      for (std::size_t j = 0; j < p.size(); ++j) out += fv * dg[j] * dot(phi.psis[j], t);
    }
  }
  return out;
}

double generator_apply(const CylinderTestFunction& phi, AgentRef y, const EmpiricalMeasure& psi,
                       const FieldPair& fp, double sigma) {
  return generator_apply(phi, y, *fp.bind(psi), sigma);
}

double generator_apply_fd(const CylinderTestFunction& phi, AgentRef y, const EmpiricalMeasure& psi,
                          const FieldPair& fp, double sigma, double h) {
  const std::size_t d = y.x.size(), K = y.lambda.size();
  auto b = fp.bind(psi);
  std::vector<double> v(d), t(K);
  b->velocity(y, v);
  b->label_drift(y, t);
  std::vector<double> x(y.x.begin(), y.x.end()), l(y.lambda.begin(), y.lambda.end());
  const double f0 = phi.value(x, l);

  double lap = 0;
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    lap += (phi.value(xp, l) - 2 * f0 + phi.value(xm, l)) / (h * h);
  }
  std::vector<double> xp = x, xm = x;
  for (std::size_t c = 0; c < d; ++c) {
    xp[c] += h * v[c];
    xm[c] -= h * v[c];
  }
  const double drift_x = (phi.value(xp, l) - phi.value(xm, l)) / (2 * h);
  std::vector<double> lp = l, lm = l;
  for (std::size_t k = 0; k < K; ++k) {
    lp[k] += h * t[k];
    lm[k] -= h * t[k];
  }
  const double drift_l = (phi.value(x, lp) - phi.value(x, lm)) / (2 * h);
  return sigma * lap + drift_x + drift_l;
}

std::vector<CylinderTestFunction> default_test_family(const LabelSpace& space) {
  std::vector<double> id(space.coords().begin(), space.coords().end());
  double lip = 0;
  for (std::size_t a = 0; a < space.size(); ++a)
    for (std::size_t b = a + 1; b < space.size(); ++b)
      lip = std::max(lip, std::abs(id[a] - id[b]) / space.dist(a, b));
  using SK = SpatialFn::Kind;
  using GK = OuterFn::Kind;
  std::vector<CylinderTestFunction> fam;
  fam.push_back({"x", {SK::Affine, 0.0, {1.0}, {}, {}, 1.0}, {}, {}, {GK::One, {}}});
  fam.push_back({"x^2", {SK::Quadratic, 0.0, {0.0}, {1.0}, {}, 1.0}, {}, {}, {GK::One, {}}});
  fam.push_back({"bump", {SK::Gaussian, 1.0, {}, {}, {0.35}, 0.2}, {}, {}, {GK::One, {}}});
  fam.push_back({"<lambda,id>", {SK::Constant, 1.0, {}, {}, {}, 1.0}, {id}, {lip}, {GK::Linear, {1.0}}});
  fam.push_back({"x<lambda,id>", {SK::Affine, 0.0, {1.0}, {}, {}, 1.0}, {id}, {lip}, {GK::Linear, {1.0}}});
  fam.push_back({"<lambda,id>^2", {SK::Constant, 1.0, {}, {}, {}, 1.0}, {id}, {lip}, {GK::Square, {1.0}}});
  for (const auto& f : fam) f.validate(space);
  return fam;
}

}  // namespace mflab
