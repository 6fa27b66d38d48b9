#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mflab/ensemble.hpp"

namespace mflab {

/// Product law for initial agent states: independent positions per
/// coordinate and an independent label measure.
struct InitialLaw {
  enum class Position { Uniform, Normal, Constant };
  enum class Label { Dirichlet, Fixed, Dirac };

  Position position = Position::Uniform;
  double x_a = 0.0;  // Uniform: lower bound; Normal: mean; Constant: value
  double x_b = 1.0;  // Uniform: upper bound; Normal: standard deviation

  Label label = Label::Dirichlet;
  double alpha = 1.0;            // Dirichlet concentration
  std::vector<double> fixed;     // Fixed label weights
  std::size_t dirac_atom = 0;

  void validate(const LabelSpace& space) const;
};

std::string to_string(InitialLaw::Position p);
std::string to_string(InitialLaw::Label l);
InitialLaw::Position parse_position_kind(const std::string& s);
InitialLaw::Label parse_label_kind(const std::string& s);

/// N i.i.d. draws; replicate r uses stream {kInitial, r} of the seed.
EmpiricalMeasure sample_initial(const InitialLaw& law, const LabelSpacePtr& space, std::size_t n,
                                std::size_t dim, std::uint64_t seed, std::uint64_t replicate = 0);

/// Dirichlet(alpha, ..., alpha) draw written to `out`.
void sample_dirichlet(std::mt19937_64& gen, double alpha, std::span<double> out);

}  // namespace mflab
