#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mflab/config.hpp"
#include "mflab/report.hpp"

namespace mflab {

inline constexpr const char* kVersion = "0.1.0";

struct RunOutcome {
  std::vector<ExperimentReport> reports;
  std::vector<std::string> files;  // artifacts written, relative to out_dir
  bool passed() const;
};

/// Executes the configured mode and writes its artifacts under cfg.out_dir:
/// CSV tables, report.txt, manifest.cfg and, with emit_svg, SVG plots.
/// I/O failures throw std::runtime_error naming the path.
RunOutcome run(const RunConfig& cfg, std::ostream& log);

/// manifest.cfg contents: '#' comment header (seed, version, stream scheme,
/// wall time) followed by config_to_text(cfg).
std::string manifest_text(const RunConfig& cfg, double wall_seconds);

}  // namespace mflab
