#include "mflab/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "mflab/errors.hpp"

namespace mflab {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct Reader {
  std::istream& in;
  std::size_t line_no = 0;

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      fields = split(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw UsageError("csv line " + std::to_string(line_no) + ": " + msg);
  }

  double num(const std::string& s) const {
    try {
      return parse_double(s);
    } catch (const UsageError& e) {
      fail(e.what());
    }
  }

  std::size_t index(const std::string& s) const {
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("expected a nonnegative integer, got '" + s + "'");
    return v;
  }
};

}  // namespace

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  if (traj.states.empty()) throw UsageError("empty trajectory");
  const auto& space = *traj.states.front().space();
  out << "t,agent";
  for (std::size_t c = 0; c < traj.dim; ++c) out << ",x_" << c + 1;
  for (const auto& id : space.ids()) out << ",lambda_" << id;
  out << "\n";
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const std::string t = format_double(traj.times[s]);
    const EmpiricalMeasure& e = traj.states[s];
    for (std::size_t i = 0; i < e.size(); ++i) {
      out << t << ',' << i;
      const AgentRef y = e.agent(i);
      for (double v : y.x) out << ',' << format_double(v);
      for (double v : y.lambda) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

Trajectory read_trajectory_csv(std::istream& in, const LabelSpacePtr& space) {
  Reader r{in};
  std::vector<std::string> f;
  if (!r.next(f) || f.size() < 2 || f[0] != "t" || f[1] != "agent") r.fail("missing trajectory header");
  const std::size_t K = space->size();
  if (f.size() < 2 + K + 1) r.fail("header has too few columns for the label space");
  const std::size_t d = f.size() - 2 - K;
  Trajectory traj;
  traj.dim = d;
  std::vector<double> xs, ls;
  double cur_t = 0;
  bool open = false;
  auto flush = [&] {
    const std::size_t n = xs.size() / d;
    if (traj.states.empty()) traj.n_agents = n;
    else if (n != traj.n_agents) r.fail("time slice has a different number of agents");
    traj.times.push_back(cur_t);
    traj.states.emplace_back(space, d, std::move(xs), std::move(ls));
    xs.clear();
    ls.clear();
  };
  while (r.next(f)) {
    if (f.size() != 2 + d + K) r.fail("expected " + std::to_string(2 + d + K) + " fields");
    const double t = r.num(f[0]);
    const std::size_t agent = r.index(f[1]);
    if (open && t != cur_t) flush();
    if (!open || xs.empty()) cur_t = t;
    open = true;
    if (agent != xs.size() / d) r.fail("agents must be listed in order within a time slice");
    for (std::size_t c = 0; c < d; ++c) xs.push_back(r.num(f[2 + c]));
    for (std::size_t k = 0; k < K; ++k) ls.push_back(r.num(f[2 + d + k]));
  }
  if (open) flush();
  return traj;
}

void write_noise_csv(std::ostream& out, const Trajectory& traj) {
  out << "step,agent,coord,dB\n";
  const std::size_t per = traj.n_agents * traj.dim;
  for (std::size_t j = 0; j < traj.noise.size(); ++j) {
    const std::size_t k = j / per, rem = j % per;
    out << k << ',' << rem / traj.dim << ',' << rem % traj.dim << ',' << format_double(traj.noise[j]) << '\n';
  }
}

void read_noise_csv(std::istream& in, Trajectory& traj) {
  Reader r{in};
  std::vector<std::string> f;
  if (!r.next(f) || f.size() != 4 || f[0] != "step") r.fail("missing noise header");
  traj.noise.clear();
  const std::size_t per = traj.n_agents * traj.dim;
  while (r.next(f)) {
    if (f.size() != 4) r.fail("expected 4 fields");
    const std::size_t j = r.index(f[0]) * per + r.index(f[1]) * traj.dim + r.index(f[2]);
    if (j != traj.noise.size()) r.fail("noise rows out of order");
    traj.noise.push_back(r.num(f[3]));
  }
}

void write_raster_csv(std::ostream& out, const SpikeRecord& rec) {
  out << "agent,t,step,overshoot\n";
  for (const Spike& s : rec.spikes)
    out << s.agent << ',' << format_double(s.t) << ',' << s.step << ',' << format_double(s.overshoot) << '\n';
}

SpikeRecord read_raster_csv(std::istream& in, std::size_t n_agents, double dt, double T, double X_F) {
  Reader r{in};
  std::vector<std::string> f;
  if (!r.next(f) || f.size() != 4 || f[0] != "agent") r.fail("missing raster header");
  SpikeRecord rec{n_agents, dt, T, X_F, {}};
  while (r.next(f)) {
    if (f.size() != 4) r.fail("expected 4 fields");
    rec.spikes.push_back({r.index(f[0]), r.index(f[2]), r.num(f[1]), r.num(f[3])});
  }
  return rec;
}

void write_rates_csv(std::ostream& out, const RateTable& table) {
  out << "bin_start,rate\n";
  for (std::size_t j = 0; j < table.rate.size(); ++j)
    out << format_double(table.bin_start[j]) << ',' << format_double(table.rate[j]) << '\n';
}

RateTable read_rates_csv(std::istream& in) {
  Reader r{in};
  std::vector<std::string> f;
  if (!r.next(f) || f.size() != 2 || f[0] != "bin_start") r.fail("missing rates header");
  RateTable t;
  while (r.next(f)) {
    if (f.size() != 2) r.fail("expected 2 fields");
    t.bin_start.push_back(r.num(f[0]));
    t.rate.push_back(r.num(f[1]));
  }
  if (t.bin_start.size() >= 2) t.bin = t.bin_start[1] - t.bin_start[0];
  return t;
}

void write_measures_csv(std::ostream& out, const std::vector<LabelMeasure>& measures) {
  if (measures.empty()) return;
  const auto& ids = measures.front().space()->ids();
  for (std::size_t k = 0; k < ids.size(); ++k) out << (k ? "," : "") << ids[k];
  out << '\n';
  for (const auto& m : measures) {
    for (std::size_t k = 0; k < m.size(); ++k) out << (k ? "," : "") << format_double(m[k]);
    out << '\n';
  }
}

std::vector<LabelMeasure> read_measures_csv(std::istream& in, const LabelSpacePtr& space) {
  Reader r{in};
  std::vector<std::string> f;
  std::vector<LabelMeasure> out;
  if (!r.next(f)) return out;
  if (f != space->ids()) r.fail("header does not match the label space atom ids");
  while (r.next(f)) {
    if (f.size() != space->size()) r.fail("wrong number of weights");
    std::vector<double> w;
    for (const auto& s : f) w.push_back(r.num(s));
    out.emplace_back(space, std::move(w));
  }
  return out;
}

void write_metrics_csv(std::ostream& out, const MetricsTable& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

MetricsTable read_metrics_csv(std::istream& in) {
  Reader r{in};
  std::vector<std::string> f;
  MetricsTable t;
  if (!r.next(f)) return t;
  t.columns = f;
  while (r.next(f)) {
    if (f.size() != t.columns.size()) r.fail("wrong number of fields");
    std::vector<double> row;
    for (const auto& s : f) row.push_back(r.num(s));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace mflab
