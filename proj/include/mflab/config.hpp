#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mflab/fields.hpp"
#include "mflab/initial_law.hpp"
#include "mflab/particle.hpp"
#include "mflab/spiking.hpp"

namespace mflab {

enum class Mode { Simulate, Spiking, Converge, Stability, Weakform, Picard, Moments };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct ExperimentParams {
  std::vector<std::size_t> Ns{25, 50, 100, 200};
  std::size_t n_ref = 0;  // 0: largest N
  std::vector<double> t_checks;
  std::size_t n_reps = 10;
  std::size_t n_iters = 8;
  std::size_t n_paths = 20;
  std::size_t n_probe = 400;
  double perturb = 0.05;   // stability: std of the initial position perturbation
  double rate_bin = 0.1;   // spiking: rate table bin width
  std::size_t kink_agents = 20;
};

struct RunConfig {
  Mode mode = Mode::Simulate;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool emit_svg = false;

  SimConfig sim;
  LabelSpacePtr space;
  std::vector<double> atoms;   // set when labels come from an atom list
  std::string labels_table;    // set when labels come from a table file

  std::string field_kind = "linear";
  FieldParams field_params;

  InitialLaw initial;

  bool has_spike = false;
  double X_F = 0.7, X_R = 0.01;
  std::optional<std::pair<double, double>> X_F_range;
  std::optional<double> het_a0;
  std::uint64_t het_offset = 0;

  ExperimentParams exp;

  SpikeConfig spike_config() const;
};

/// Line-oriented sectioned key = value format with '#' comments. Every
/// error names the offending key and line.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Canonical config text with every default filled in; parsing it gives
/// back an equivalent RunConfig.
std::string config_to_text(const RunConfig& cfg);

}  // namespace mflab
