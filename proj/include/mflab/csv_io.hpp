#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mflab/particle.hpp"
#include "mflab/report.hpp"
#include "mflab/spiking.hpp"

namespace mflab {

// All numbers are written in shortest round-trip form, so every writer
// below followed by its reader reproduces the data exactly.

/// Columns t, agent, x_1..x_d, lambda_<atom id>...
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in, const LabelSpacePtr& space);

/// Columns step, agent, coord, dB.
void write_noise_csv(std::ostream& out, const Trajectory& traj);
/// Fills traj.noise from a noise CSV; traj.n_agents and traj.dim must be set.
void read_noise_csv(std::istream& in, Trajectory& traj);

/// Columns agent, t, step, overshoot.
void write_raster_csv(std::ostream& out, const SpikeRecord& rec);
SpikeRecord read_raster_csv(std::istream& in, std::size_t n_agents, double dt, double T, double X_F);

/// Columns bin_start, rate.
void write_rates_csv(std::ostream& out, const RateTable& table);
RateTable read_rates_csv(std::istream& in);

/// One row of weights per measure, header = atom ids.
void write_measures_csv(std::ostream& out, const std::vector<LabelMeasure>& measures);
std::vector<LabelMeasure> read_measures_csv(std::istream& in, const LabelSpacePtr& space);

void write_metrics_csv(std::ostream& out, const MetricsTable& table);
MetricsTable read_metrics_csv(std::istream& in);

/// Parses a double written by format_double (also accepts nan / inf).
double parse_double(const std::string& s);

}  // namespace mflab
