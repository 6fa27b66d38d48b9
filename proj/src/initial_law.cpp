#include "mflab/initial_law.hpp"

#include <cmath>

#include "mflab/errors.hpp"
#include "mflab/rng.hpp"

namespace mflab {

void InitialLaw::validate(const LabelSpace& space) const {
  if (!std::isfinite(x_a) || !std::isfinite(x_b)) throw UsageError("initial law bounds must be finite");
  if (position == Position::Uniform && !(x_a <= x_b))
    throw UsageError("initial law: uniform positions need x_a <= x_b");
  if (position == Position::Normal && !(x_b >= 0))
    throw UsageError("initial law: normal positions need a nonnegative standard deviation");
  if (label == Label::Dirichlet && !(alpha > 0)) throw UsageError("initial law: Dirichlet alpha must be > 0");
  if (label == Label::Fixed) {
    if (fixed.size() != space.size())
      throw UsageError("initial law: fixed label weights need " + std::to_string(space.size()) + " entries");
    std::vector<double> w = fixed;
    repair_probability(w);
  }
  if (label == Label::Dirac && dirac_atom >= space.size())
    throw UsageError("initial law: Dirac atom index out of range");
}

std::string to_string(InitialLaw::Position p) {
  switch (p) {
    case InitialLaw::Position::Uniform: return "uniform";
    case InitialLaw::Position::Normal: return "normal";
    case InitialLaw::Position::Constant: return "constant";
  }
  return "?";
}

std::string to_string(InitialLaw::Label l) {
  switch (l) {
    case InitialLaw::Label::Dirichlet: return "dirichlet";
    case InitialLaw::Label::Fixed: return "fixed";
    case InitialLaw::Label::Dirac: return "dirac";
  }
  return "?";
}

InitialLaw::Position parse_position_kind(const std::string& s) {
  if (s == "uniform") return InitialLaw::Position::Uniform;
  if (s == "normal") return InitialLaw::Position::Normal;
  if (s == "constant") return InitialLaw::Position::Constant;
  throw UsageError("unknown position law '" + s + "' (uniform, normal, constant)");
}

InitialLaw::Label parse_label_kind(const std::string& s) {
  if (s == "dirichlet") return InitialLaw::Label::Dirichlet;
  if (s == "fixed") return InitialLaw::Label::Fixed;
  if (s == "dirac") return InitialLaw::Label::Dirac;
  throw UsageError("unknown label law '" + s + "' (dirichlet, fixed, dirac)");
}

void sample_dirichlet(std::mt19937_64& gen, double alpha, std::span<double> out) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  double total = 0;
  for (double& w : out) {
    w = gamma(gen);
    total += w;
  }
  if (total <= 0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return;
  }
  for (double& w : out) w /= total;
}

EmpiricalMeasure sample_initial(const InitialLaw& law, const LabelSpacePtr& space, std::size_t n,
                                std::size_t dim, std::uint64_t seed, std::uint64_t replicate) {
  law.validate(*space);
  const std::size_t K = space->size();
  std::vector<double> x(n * dim), lambda(n * K, 0.0);
  std::mt19937_64 gen(rng::derive(seed, {rng::kInitial, replicate}));
  std::vector<double> fixed = law.fixed;
  if (law.label == InitialLaw::Label::Fixed) repair_probability(fixed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      double& v = x[i * dim + c];
      switch (law.position) {
        case InitialLaw::Position::Uniform:
          v = law.x_a + (law.x_b - law.x_a) * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
          break;
        case InitialLaw::Position::Normal:
          v = law.x_a + law.x_b * std::normal_distribution<double>(0.0, 1.0)(gen);
          break;
        case InitialLaw::Position::Constant:
          v = law.x_a;
          break;
      }
    }
    std::span<double> w(lambda.data() + i * K, K);
    switch (law.label) {
      case InitialLaw::Label::Dirichlet: sample_dirichlet(gen, law.alpha, w); break;
      case InitialLaw::Label::Fixed: std::copy(fixed.begin(), fixed.end(), w.begin()); break;
      case InitialLaw::Label::Dirac: w[law.dirac_atom] = 1.0; break;
    }
  }
  return EmpiricalMeasure(space, dim, std::move(x), std::move(lambda));
}

}  // namespace mflab
