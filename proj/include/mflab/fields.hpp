#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mflab/ensemble.hpp"

namespace mflab {

/// A field pair evaluated against one frozen snapshot of the population.
/// Implementations precompute whatever population statistics they need in
/// FieldPair::bind, after which evaluation is const and thread-safe.
class BoundField {
 public:
  virtual ~BoundField() = default;

  /// v_Psi(y), written to `out` (size d).
  virtual void velocity(AgentRef y, std::span<double> out) const = 0;
  /// T_Psi(x, lambda + shift), a zero-mass weight vector written to `out`
  /// (size K). `label_shift` is empty for the unperturbed operator.
  virtual void label_drift(AgentRef y, std::span<const double> label_shift,
                           std::span<double> out) const = 0;

  void label_drift(AgentRef y, std::span<double> out) const { label_drift(y, {}, out); }
};

/// b_Psi = (v_Psi, T_Psi).
class FieldPair {
 public:
  virtual ~FieldPair() = default;

  virtual std::unique_ptr<BoundField> bind(const EmpiricalMeasure& psi) const = 0;
  virtual std::string name() const = 0;

  /// Positivity margin delta_R when known in closed form.
  virtual std::optional<double> analytic_delta(const LabelSpace& /*space*/, double /*radius*/) const {
    return std::nullopt;
  }
  /// Whether the label operator is defined for signed label arguments
  /// (needed by the heterogeneous-noise variant).
  virtual bool accepts_signed_labels() const { return false; }
  /// Spatial dimension the field is restricted to, if any.
  virtual std::optional<std::size_t> required_dim() const { return std::nullopt; }
};

using FieldPtr = std::shared_ptr<const FieldPair>;

/// Convenience: T_Psi(y) as a LabelMeasure.
LabelMeasure evaluate_label_drift(const FieldPair& fp, AgentRef y, const EmpiricalMeasure& psi);
std::vector<double> evaluate_velocity(const FieldPair& fp, AgentRef y, const EmpiricalMeasure& psi);

// ---------------------------------------------------------------------------
// Linear one-dimensional model
//
//   v   = a x + b <lambda, id> + c mean_x(Psi) + v0
//   s   = d x + e <lambda, id> + f mean_x(Psi)
//   T   = (s - mean_Psi s) * gate * e0,   e0 = (delta_max - delta_min) / d(u_min, u_max)
//
// where u_min / u_max are the atoms with extreme coordinates. `gate` is 1
// whenever the agent holds at least `boundary_margin` mass on the atom being
// drained and decays linearly to 0 at the simplex boundary; a margin of 0
// disables it.

struct LinearFieldParams {
  double a = 0, b = 0, c = 0;
  double d = 0, e = 0, f = 0;
  double v0 = 0;
};

inline constexpr double kDefaultBoundaryMargin = 1.0;

double linear_velocity(const LinearFieldParams& p, AgentRef y, const EmpiricalMeasure& psi);
LabelMeasure linear_label_op(const LinearFieldParams& p, AgentRef y, const EmpiricalMeasure& psi,
                             double boundary_margin = kDefaultBoundaryMargin);

class LinearField final : public FieldPair {
 public:
  explicit LinearField(LinearFieldParams p, double boundary_margin = kDefaultBoundaryMargin);

  std::unique_ptr<BoundField> bind(const EmpiricalMeasure& psi) const override;
  std::string name() const override { return "linear"; }
  bool accepts_signed_labels() const override { return true; }
  std::optional<std::size_t> required_dim() const override { return 1; }
  /// Valid for populations inside the same ball; infinite without a margin.
  std::optional<double> analytic_delta(const LabelSpace& space, double radius) const override;

  const LinearFieldParams& params() const { return p_; }
  double boundary_margin() const { return margin_; }

 private:
  LinearFieldParams p_;
  double margin_;
};

// ---------------------------------------------------------------------------
// Kernel label operator: weight at atom u_k is beta_k (1/N) sum_i alpha(u_k, z_i),
// shifted uniformly to zero total mass. The receiving agent only enters
// through the optional boundary gate, which scales negative entries by
// min(1, lambda_k / margin) and rescales positive entries to keep zero mass.

using AlphaFn = std::function<double(std::size_t atom, double atom_coord, AgentRef z)>;

struct KernelOperatorSpec {
  std::string alpha_name;
  AlphaFn alpha;
  std::vector<double> beta;  // one per atom; empty means all ones
  double boundary_margin = 0.0;
};

LabelMeasure kernel_label_op(const KernelOperatorSpec& spec, AgentRef y, const EmpiricalMeasure& psi);
/// Pairing of the unshifted kernel average against mu = sum_k beta_k delta_{u_k}.
double kernel_centering_residual(const KernelOperatorSpec& spec, const EmpiricalMeasure& psi);

/// alpha(u, z) = w_x u x_1(z) + w_lambda u <lambda_z, id>.
AlphaFn kernel_moment_alpha(LabelSpacePtr space, double w_x, double w_lambda);

class KernelField final : public FieldPair {
 public:
  /// Velocity uses a, b, c, v0 from `velocity`; the label part comes from `spec`.
  KernelField(LinearFieldParams velocity, KernelOperatorSpec spec);

  std::unique_ptr<BoundField> bind(const EmpiricalMeasure& psi) const override;
  std::string name() const override { return "kernel-" + spec_.alpha_name; }
  bool accepts_signed_labels() const override { return true; }
  std::optional<std::size_t> required_dim() const override { return 1; }

  const KernelOperatorSpec& spec() const { return spec_; }

 private:
  LinearFieldParams vel_;
  KernelOperatorSpec spec_;
};

// ---------------------------------------------------------------------------
// Registry used by the config loader. Built-in kinds: "linear",
// "kernel-moment". Missing parameters default to 0; unknown names throw ConfigError.

using FieldParams = std::map<std::string, double>;
using FieldFactory = std::function<FieldPtr(const FieldParams&, const LabelSpacePtr&)>;

void register_field(const std::string& kind, FieldFactory factory);
bool field_registered(const std::string& kind);
FieldPtr make_field(const std::string& kind, const FieldParams& params, const LabelSpacePtr& space);
std::vector<std::string> registered_fields();

}  // namespace mflab
