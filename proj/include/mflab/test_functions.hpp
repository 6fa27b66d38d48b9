#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mflab/fields.hpp"

namespace mflab {

/// Closed-form spatial factor f : R^d -> R.
struct SpatialFn {
  enum class Kind { Constant, Affine, Quadratic, Gaussian };
  Kind kind = Kind::Constant;
  double c0 = 1.0;             // constant term (Gaussian: amplitude)
  std::vector<double> w;       // linear coefficients
  std::vector<double> q;       // diagonal quadratic coefficients
  std::vector<double> center;  // Gaussian center
  double width = 1.0;          // Gaussian standard width

  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  double laplacian(std::span<const double> x) const;
};

/// Closed-form outer factor g : R^m -> R.
struct OuterFn {
  enum class Kind { One, Linear, Square, Exp };
  Kind kind = Kind::One;
  std::vector<double> coef;  // Linear / Exp: weights; Square: g = (coef . p)^2

  double value(std::span<const double> p) const;
  void gradient(std::span<const double> p, std::span<double> out) const;
};

/// phi(x, lambda) = f(x) g(<lambda, psi_1>, ..., <lambda, psi_m>).
struct CylinderTestFunction {
  std::string name;
  SpatialFn f;
  std::vector<std::vector<double>> psis;  // values at the atoms
  std::vector<double> psi_lip;            // declared Lipschitz constants
  OuterFn g;

  /// Checks sizes and that every psi_j respects its declared Lipschitz constant.
  void validate(const LabelSpace& space) const;
  /// Accepts signed label arguments.
  double value(std::span<const double> x, std::span<const double> lambda) const;
  std::vector<double> pairings(std::span<const double> lambda) const;
};

/// sigma Lap_x phi + grad_x phi . v + f(x) sum_j d_j g <T, psi_j>.
double generator_apply(const CylinderTestFunction& phi, AgentRef y, const BoundField& b, double sigma);
double generator_apply(const CylinderTestFunction& phi, AgentRef y, const EmpiricalMeasure& psi,
                       const FieldPair& fp, double sigma);
/// Same quantity by central differences of phi; for cross-checking only.
double generator_apply_fd(const CylinderTestFunction& phi, AgentRef y, const EmpiricalMeasure& psi,
                          const FieldPair& fp, double sigma, double h = 1e-4);

/// The registered family used by the weak-form experiment (d = 1).
std::vector<CylinderTestFunction> default_test_family(const LabelSpace& space);

}  // namespace mflab
