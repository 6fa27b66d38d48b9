#include "mflab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "mflab/errors.hpp"

namespace mflab {

void MetricsTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw UsageError("metrics row has the wrong number of columns");
  rows.push_back(std::move(row));
}

double MetricsTable::at(std::size_t row, const std::string& column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw UsageError("no metrics column '" + column + "'");
  return rows.at(row)[static_cast<std::size_t>(it - columns.begin())];
}

bool ExperimentReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

void ExperimentReport::add_parameter(const std::string& key, double value) {
  parameters.emplace_back(key, format_double(value));
}

Verdict& ExperimentReport::check(const std::string& n, const std::string& invariant, bool ok, double value,
                                 double tolerance, const std::string& detail) {
  verdicts.push_back({n, invariant, ok, value, tolerance, detail});
  return verdicts.back();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_report_text(std::ostream& out, const ExperimentReport& r) {
  out << "experiment: " << r.name << "\n";
  out << "status: " << (r.passed() ? "PASS" : "FAIL") << "\n";
  out << "runtime_s: " << format_double(r.runtime_seconds) << "\n";
  out << "\n[parameters]\n";
  for (const auto& [k, v] : r.parameters) out << k << " = " << v << "\n";
  out << "\n[verdicts]\n";
  for (const Verdict& v : r.verdicts) {
    out << (v.passed ? "PASS " : "FAIL ") << v.name << " (" << v.invariant << ")"
        << " value=" << format_double(v.value) << " tol=" << format_double(v.tolerance);
    if (!v.detail.empty()) out << " : " << v.detail;
    out << "\n";
  }
  out << "\n[metrics]\n";
  for (std::size_t c = 0; c < r.metrics.columns.size(); ++c) out << (c ? "," : "") << r.metrics.columns[c];
  out << "\n";
  for (const auto& row : r.metrics.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << "\n";
  }
}

}  // namespace mflab
