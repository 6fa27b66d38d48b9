#include "mflab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "mflab/errors.hpp"

namespace mflab {

namespace {

double mean_label(const LabelSpace& space, std::span<const double> lambda,
                  std::span<const double> shift) {
  double m = 0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    double w = lambda[k];
    if (!shift.empty()) w += shift[k];
    m += w * space.coord(k);
  }
  return m;
}

void require_dim1(const EmpiricalMeasure& psi) {
  if (psi.dim() != 1) throw UsageError("linear field requires d = 1, got d = " + std::to_string(psi.dim()));
}

// Tilt along e0 with the boundary gate applied to the drained atom.
void write_tilt(const LabelSpace& space, double c, std::span<const double> lambda, double margin,
                std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t lo = space.argmin_coord(), hi = space.argmax_coord();
  if (lo == hi || c == 0.0) return;
  const std::size_t drained = c > 0 ? lo : hi;
  double gate = 1.0;
  if (margin > 0) gate = std::min(1.0, std::max(lambda[drained], 0.0) / margin);
  const double amp = c * gate / space.dist(lo, hi);
  out[hi] = amp;
  out[lo] = -amp;
}

class LinearBound final : public BoundField {
 public:
  using BoundField::label_drift;

  LinearBound(const LinearFieldParams& p, double margin, const EmpiricalMeasure& psi)
      : p_(p), margin_(margin), space_(psi.space()) {
    require_dim1(psi);
    xbar_ = psi.mean_position(0);
    double acc = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) acc += mean_label(*space_, psi.agent(i).lambda, {});
    mbar_ = psi.size() ? acc / static_cast<double>(psi.size()) : 0.0;
    sbar_ = p_.d * xbar_ + p_.e * mbar_ + p_.f * xbar_;
  }

  void velocity(AgentRef y, std::span<double> out) const override {
    const double m = mean_label(*space_, y.lambda, {});
    out[0] = p_.a * y.x[0] + p_.b * m + p_.c * xbar_ + p_.v0;
  }

  void label_drift(AgentRef y, std::span<const double> shift, std::span<double> out) const override {
    const double m = mean_label(*space_, y.lambda, shift);
    const double s = p_.d * y.x[0] + p_.e * m + p_.f * xbar_;
    write_tilt(*space_, s - sbar_, y.lambda, margin_, out);
  }

 private:
  LinearFieldParams p_;
  double margin_;
  LabelSpacePtr space_;
  double xbar_ = 0, mbar_ = 0, sbar_ = 0;
};

std::vector<double> kernel_weights(const KernelOperatorSpec& spec, const EmpiricalMeasure& psi,
                                   bool centered) {
  const LabelSpace& space = *psi.space();
  const std::size_t K = space.size();
  if (!spec.beta.empty() && spec.beta.size() != K)
    throw UsageError("kernel beta has " + std::to_string(spec.beta.size()) + " entries, expected " +
                     std::to_string(K));
  if (psi.size() == 0) throw UsageError("kernel operator needs a nonempty population");
  std::vector<double> w(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double acc = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) acc += spec.alpha(k, space.coord(k), psi.agent(i));
    const double beta = spec.beta.empty() ? 1.0 : spec.beta[k];
    w[k] = beta * acc / static_cast<double>(psi.size());
  }
  if (centered) {
    double mean = 0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(K);
    for (double& v : w) v -= mean;
  }
  return w;
}

// Negative entries shrink toward 0 as lambda_k drops below the margin;
// positive entries are rescaled so the total stays zero.
void gate_zero_mass(std::span<const double> w, std::span<const double> lambda, double margin,
                    std::span<double> out) {
  std::copy(w.begin(), w.end(), out.begin());
  if (margin <= 0) return;
  double neg = 0, neg_gated = 0, pos = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] < 0) {
      const double g = std::min(1.0, std::max(lambda[k], 0.0) / margin);
      neg += w[k];
      out[k] = w[k] * g;
      neg_gated += out[k];
    } else {
      pos += w[k];
    }
  }
  if (neg == neg_gated || pos == 0) return;
  const double scale = -neg_gated / pos;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (w[k] > 0) out[k] = w[k] * scale;
}

class KernelBound final : public BoundField {
 public:
  using BoundField::label_drift;

  KernelBound(const LinearFieldParams& vel, const KernelOperatorSpec& spec, const EmpiricalMeasure& psi)
      : vel_(vel), margin_(spec.boundary_margin), space_(psi.space()) {
    require_dim1(psi);
    xbar_ = psi.mean_position(0);
    w_ = kernel_weights(spec, psi, true);
  }

  void velocity(AgentRef y, std::span<double> out) const override {
    const double m = mean_label(*space_, y.lambda, {});
    out[0] = vel_.a * y.x[0] + vel_.b * m + vel_.c * xbar_ + vel_.v0;
  }

  void label_drift(AgentRef y, std::span<const double>, std::span<double> out) const override {
    gate_zero_mass(w_, y.lambda, margin_, out);
  }

 private:
  LinearFieldParams vel_;
  double margin_;
  LabelSpacePtr space_;
  double xbar_ = 0;
  std::vector<double> w_;
};

}  // namespace

LabelMeasure evaluate_label_drift(const FieldPair& fp, AgentRef y, const EmpiricalMeasure& psi) {
  auto bound = fp.bind(psi);
  std::vector<double> out(psi.n_labels());
  bound->label_drift(y, out);
  return LabelMeasure(psi.space(), std::move(out));
}

std::vector<double> evaluate_velocity(const FieldPair& fp, AgentRef y, const EmpiricalMeasure& psi) {
  auto bound = fp.bind(psi);
  std::vector<double> out(psi.dim());
  bound->velocity(y, out);
  return out;
}

double linear_velocity(const LinearFieldParams& p, AgentRef y, const EmpiricalMeasure& psi) {
  LinearBound b(p, 0.0, psi);
  double v = 0;
  b.velocity(y, std::span<double>(&v, 1));
  return v;
}

LabelMeasure linear_label_op(const LinearFieldParams& p, AgentRef y, const EmpiricalMeasure& psi,
                             double boundary_margin) {
  LinearBound b(p, boundary_margin, psi);
  std::vector<double> out(psi.n_labels());
  b.label_drift(y, out);
  return LabelMeasure(psi.space(), std::move(out));
}

LinearField::LinearField(LinearFieldParams p, double boundary_margin) : p_(p), margin_(boundary_margin) {
  for (double v : {p.a, p.b, p.c, p.d, p.e, p.f, p.v0})
    if (!std::isfinite(v)) throw UsageError("linear field coefficients must be finite");
  if (!(margin_ >= 0) || !std::isfinite(margin_)) throw UsageError("boundary margin must be >= 0");
}

std::unique_ptr<BoundField> LinearField::bind(const EmpiricalMeasure& psi) const {
  return std::make_unique<LinearBound>(p_, margin_, psi);
}

std::optional<double> LinearField::analytic_delta(const LabelSpace& space, double radius) const {
  const std::size_t lo = space.argmin_coord(), hi = space.argmax_coord();
  if (lo == hi) return 0.0;
  if (margin_ <= 0) return std::nullopt;
  const double span = space.coord(hi) - space.coord(lo);
  const double cmax = 2 * std::abs(p_.d) * std::max(radius - 1, 0.0) + std::abs(p_.e) * span;
  return cmax / (margin_ * space.dist(lo, hi));
}

LabelMeasure kernel_label_op(const KernelOperatorSpec& spec, AgentRef y, const EmpiricalMeasure& psi) {
  const auto w = kernel_weights(spec, psi, true);
  std::vector<double> out(w.size());
  gate_zero_mass(w, y.lambda, spec.boundary_margin, out);
  return LabelMeasure(psi.space(), std::move(out));
}

double kernel_centering_residual(const KernelOperatorSpec& spec, const EmpiricalMeasure& psi) {
  const auto w = kernel_weights(spec, psi, false);
  double acc = 0;
  for (double v : w) acc += v;
  return acc;
}

AlphaFn kernel_moment_alpha(LabelSpacePtr space, double w_x, double w_lambda) {
  return [space = std::move(space), w_x, w_lambda](std::size_t, double u, AgentRef z) {
    double m = 0;
    if (w_lambda != 0.0) m = mean_label(*space, z.lambda, {});
    return u * (w_x * z.x[0] + w_lambda * m);
  };
}

KernelField::KernelField(LinearFieldParams velocity, KernelOperatorSpec spec)
    : vel_(velocity), spec_(std::move(spec)) {
  if (!spec_.alpha) throw UsageError("kernel field needs an alpha function");
  if (!(spec_.boundary_margin >= 0)) throw UsageError("boundary margin must be >= 0");
}

std::unique_ptr<BoundField> KernelField::bind(const EmpiricalMeasure& psi) const {
  return std::make_unique<KernelBound>(vel_, spec_, psi);
}

}  // namespace mflab

namespace mflab {

namespace {

double param(const FieldParams& p, const std::string& key, double fallback = 0.0) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

LinearFieldParams linear_params(const FieldParams& p) {
  return {param(p, "a"), param(p, "b"), param(p, "c"), param(p, "d"),
          param(p, "e"), param(p, "f"), param(p, "v0")};
}

void check_keys(const FieldParams& p, const std::string& kind, const std::vector<std::string>& allowed) {
  for (const auto& [k, v] : p) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError("field '" + kind + "' has no parameter '" + k + "' (known: " + list + ")");
    }
    if (!std::isfinite(v)) throw ConfigError("field parameter '" + k + "' must be finite");
  }
}

std::map<std::string, FieldFactory>& registry() {
  static std::map<std::string, FieldFactory> r = {
      {"linear",
       [](const FieldParams& p, const LabelSpacePtr&) -> FieldPtr {
         check_keys(p, "linear", {"a", "b", "c", "d", "e", "f", "v0", "margin"});
         return std::make_shared<LinearField>(linear_params(p),
                                              param(p, "margin", kDefaultBoundaryMargin));
       }},
      {"kernel-moment",
       [](const FieldParams& p, const LabelSpacePtr& space) -> FieldPtr {
         std::vector<std::string> keys{"a", "b", "c", "v0", "w_x", "w_lambda", "margin"};
         for (std::size_t k = 0; k < space->size(); ++k) keys.push_back("beta" + std::to_string(k + 1));
         check_keys(p, "kernel-moment", keys);
         KernelOperatorSpec spec;
         spec.alpha_name = "moment";
         spec.alpha = kernel_moment_alpha(space, param(p, "w_x"), param(p, "w_lambda"));
         spec.boundary_margin = param(p, "margin", kDefaultBoundaryMargin);
         for (std::size_t k = 0; k < space->size(); ++k) {
           const std::string key = "beta" + std::to_string(k + 1);
           spec.beta.push_back(param(p, key, 1.0));
         }
         return std::make_shared<KernelField>(linear_params(p), std::move(spec));
       }},
  };
  return r;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_field(const std::string& kind, FieldFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[kind] = std::move(factory);
}

bool field_registered(const std::string& kind) {
  std::lock_guard lock(registry_mutex());
  return registry().count(kind) > 0;
}

FieldPtr make_field(const std::string& kind, const FieldParams& params, const LabelSpacePtr& space) {
  FieldFactory f;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(kind);
    if (it == registry().end()) throw ConfigError("unknown field kind '" + kind + "'");
    f = it->second;
  }
  return f(params, space);
}

std::vector<std::string> registered_fields() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

}  // namespace mflab
