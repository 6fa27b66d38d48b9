#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mflab {

struct Verdict {
  std::string name;       // short check name
  std::string invariant;  // the property being checked
  bool passed = false;
  double value = 0;
  double tolerance = 0;
  std::string detail;
};

/// Column-named table of doubles.
struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  double at(std::size_t row, const std::string& column) const;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  MetricsTable metrics;
  std::vector<Verdict> verdicts;
  double runtime_seconds = 0;

  bool passed() const;
  void add_parameter(const std::string& key, const std::string& value) { parameters.emplace_back(key, value); }
  void add_parameter(const std::string& key, double value);
  Verdict& check(const std::string& name, const std::string& invariant, bool passed, double value = 0,
                 double tolerance = 0, const std::string& detail = {});
};

/// Plain-text report: header, parameters, verdicts, and the table.
void write_report_text(std::ostream& out, const ExperimentReport& r);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace mflab
