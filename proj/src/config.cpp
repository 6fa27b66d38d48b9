#include "mflab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mflab/csv_io.hpp"
#include "mflab/errors.hpp"
#include "mflab/report.hpp"

namespace mflab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

// section -> key -> entry
class Document {
 public:
  Document(const std::string& text, std::string source) : source_(std::move(source)) {
    std::istringstream in(text);
    std::string raw, section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "malformed section header '" + line + "'");
        section = trim(line.substr(1, line.size() - 2));
        if (!kSections.count(section)) fail(line_no, "unknown section [" + section + "]");
        sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
      if (section.empty()) fail(line_no, "key outside of any section");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) fail(line_no, "empty key");
      auto& sec = sections_[section];
      if (sec.count(key)) fail(line_no, "duplicate key '" + section + "." + key + "'");
      sec[key] = {trim(line.substr(eq + 1)), line_no, false};
    }
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  const Entry* find(const std::string& s, const std::string& k) {
    auto it = sections_.find(s);
    if (it == sections_.end()) return nullptr;
    auto jt = it->second.find(k);
    if (jt == it->second.end()) return nullptr;
    jt->second.used = true;
    return &jt->second;
  }

  const Entry& require(const std::string& s, const std::string& k) {
    if (const Entry* e = find(s, k)) return *e;
    throw ConfigError(source_ + ": missing required key '" + s + "." + k + "'");
  }

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const Entry& e, const std::string& s, const std::string& k, const std::string& msg) const {
    fail(e.line, "key '" + s + "." + k + "' " + msg);
  }

  // marks keys of sections read generically
  std::map<std::string, Entry>& section(const std::string& s) { return sections_[s]; }

  void reject_unused() const {
    for (const auto& [s, keys] : sections_)
      for (const auto& [k, e] : keys)
        if (!e.used) fail(e.line, "unknown key '" + s + "." + k + "'");
  }

  const std::string& source() const { return source_; }

 private:
  inline static const std::set<std::string> kSections = {"run", "sim", "labels", "field", "initial", "spike", "experiment"};
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

struct Getter {
  Document& doc;

  double number(const Entry& e, const std::string& s, const std::string& k) {
    try {
      const double v = parse_double(e.value);
      if (!std::isfinite(v)) doc.fail(e, s, k, "must be finite");
      return v;
    } catch (const UsageError&) {
      doc.fail(e, s, k, "expects a number, got '" + e.value + "'");
    }
  }

  std::uint64_t integer(const Entry& e, const std::string& s, const std::string& k) {
    std::uint64_t v = 0;
    auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size())
      doc.fail(e, s, k, "expects a nonnegative integer, got '" + e.value + "'");
    return v;
  }

  bool boolean(const Entry& e, const std::string& s, const std::string& k) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    doc.fail(e, s, k, "expects true or false, got '" + e.value + "'");
  }

  std::vector<std::string> list(const Entry& e) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(e.value);
    while (std::getline(in, cur, ',')) {
      cur = trim(cur);
      if (!cur.empty()) out.push_back(cur);
    }
    return out;
  }

  std::vector<double> numbers(const Entry& e, const std::string& s, const std::string& k) {
    std::vector<double> out;
    for (const auto& item : list(e)) {
      Entry tmp{item, e.line, true};
      out.push_back(number(tmp, s, k));
    }
    return out;
  }

  std::vector<std::size_t> integers(const Entry& e, const std::string& s, const std::string& k) {
    std::vector<std::size_t> out;
    for (const auto& item : list(e)) {
      Entry tmp{item, e.line, true};
      out.push_back(static_cast<std::size_t>(integer(tmp, s, k)));
    }
    return out;
  }

  void opt(const std::string& s, const std::string& k, double& dst) {
    if (const Entry* e = doc.find(s, k)) dst = number(*e, s, k);
  }
  void opt(const std::string& s, const std::string& k, std::size_t& dst) {
    if (const Entry* e = doc.find(s, k)) dst = static_cast<std::size_t>(integer(*e, s, k));
  }
  void opt(const std::string& s, const std::string& k, bool& dst) {
    if (const Entry* e = doc.find(s, k)) dst = boolean(*e, s, k);
  }
  void opt(const std::string& s, const std::string& k, std::string& dst) {
    if (const Entry* e = doc.find(s, k)) dst = e->value;
  }
};

std::size_t line_of(Document& doc, const std::string& s, const std::string& k) {
  const Entry* e = doc.find(s, k);
  return e ? e->line : 0;
}

// Runs `check`; a UsageError or InvariantError is rethrown naming the key.
template <class F>
void checked(Document& doc, const std::string& s, const std::string& k, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    const std::size_t line = line_of(doc, s, k);
    const std::string where = line ? doc.source() + ":" + std::to_string(line) : doc.source();
    throw ConfigError(where + ": key '" + s + "." + k + "': " + e.what());
  }
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Simulate: return "simulate";
    case Mode::Spiking: return "spiking";
    case Mode::Converge: return "converge";
    case Mode::Stability: return "stability";
    case Mode::Weakform: return "weakform";
    case Mode::Picard: return "picard";
    case Mode::Moments: return "moments";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Simulate, Mode::Spiking, Mode::Converge, Mode::Stability, Mode::Weakform, Mode::Picard,
                 Mode::Moments})
    if (to_string(m) == s) return m;
  throw UsageError("unknown mode '" + s + "' (simulate, spiking, converge, stability, weakform, picard, moments)");
}

SpikeConfig RunConfig::spike_config() const {
  SpikeConfig sc;
  sc.base = sim;
  sc.X_F = X_F;
  sc.X_R = X_R;
  sc.X_F_range = X_F_range;
  if (het_a0) sc.het = HeterogeneousNoiseSpec::default_basis(space, *het_a0, het_offset);
  return sc;
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  Document doc(text, source);
  Getter get{doc};
  RunConfig cfg;

  // [run]
  {
    const Entry& e = doc.require("run", "mode");
    checked(doc, "run", "mode", [&] { cfg.mode = parse_mode(e.value); });
  }
  get.opt("run", "seed", cfg.seed);
  get.opt("run", "out", cfg.out_dir);
  get.opt("run", "emit_svg", cfg.emit_svg);

  // [labels]
  {
    const Entry* atoms = doc.find("labels", "atoms");
    const Entry* table = doc.find("labels", "table");
    if (atoms && table) doc.fail(table->line, "key 'labels.table' conflicts with 'labels.atoms'");
    if (table) {
      cfg.labels_table = table->value;
      std::filesystem::path p(table->value);
      if (p.is_relative() && source != "<config>") p = std::filesystem::path(source).parent_path() / p;
      std::ifstream in(p);
      if (!in) doc.fail(*table, "labels", "table", "cannot open '" + p.string() + "'");
      checked(doc, "labels", "table", [&] { cfg.space = read_label_space(in); });
      cfg.labels_table = std::filesystem::absolute(p).string();
    } else {
      cfg.atoms = {0.0, 0.5, 1.0};
      if (atoms) cfg.atoms = get.numbers(*atoms, "labels", "atoms");
      checked(doc, "labels", "atoms", [&] { cfg.space = LabelSpace::line(cfg.atoms); });
    }
  }

  // [sim]
  {
    SimConfig& s = cfg.sim;
    s.N = static_cast<std::size_t>(get.integer(doc.require("sim", "N"), "sim", "N"));
    get.opt("sim", "d", s.d);
    get.opt("sim", "dt", s.dt);
    get.opt("sim", "T", s.T);
    get.opt("sim", "sigma", s.sigma);
    if (const Entry* e = doc.find("sim", "theta"); e && e->value != "auto") s.theta = get.number(*e, "sim", "theta");
    if (const Entry* e = doc.find("sim", "radius"); e && e->value != "auto") s.radius = get.number(*e, "sim", "radius");
    get.opt("sim", "record_every", s.record_every);
    get.opt("sim", "record_noise", s.record_noise);
    s.seed = cfg.seed;
  }

  // [field]
  {
    const Entry& kind = doc.require("field", "kind");
    cfg.field_kind = kind.value;
    if (!field_registered(cfg.field_kind)) doc.fail(kind, "field", "kind", "names an unregistered field '" + kind.value + "'");
    for (auto& [k, e] : doc.section("field")) {
      if (k == "kind") continue;
      e.used = true;
      cfg.field_params[k] = get.number(e, "field", k);
    }
    try {
      cfg.sim.field = make_field(cfg.field_kind, cfg.field_params, cfg.space);
    } catch (const std::exception& e) {
      doc.fail(kind, "field", "kind", std::string("is invalid: ") + e.what());
    }
  }

  // [initial]
  {
    InitialLaw& law = cfg.initial;
    law.position = InitialLaw::Position::Uniform;
    law.x_a = 0.0;
    law.x_b = 0.7;
    std::string pos = to_string(law.position), lab = to_string(law.label);
    get.opt("initial", "position", pos);
    get.opt("initial", "label", lab);
    checked(doc, "initial", "position", [&] { law.position = parse_position_kind(pos); });
    checked(doc, "initial", "label", [&] { law.label = parse_label_kind(lab); });
    get.opt("initial", "x_a", law.x_a);
    get.opt("initial", "x_b", law.x_b);
    get.opt("initial", "alpha", law.alpha);
    if (const Entry* e = doc.find("initial", "fixed")) law.fixed = get.numbers(*e, "initial", "fixed");
    get.opt("initial", "dirac", law.dirac_atom);
    checked(doc, "initial", "position", [&] { law.validate(*cfg.space); });
  }

  // [spike]
  cfg.has_spike = doc.has_section("spike");
  if (cfg.mode == Mode::Spiking && !cfg.has_spike) throw ConfigError(source + ": mode 'spiking' requires a [spike] section");
  if (cfg.has_spike) {
    get.opt("spike", "X_F", cfg.X_F);
    get.opt("spike", "X_R", cfg.X_R);
    if (const Entry* e = doc.find("spike", "X_F_range")) {
      const auto v = get.numbers(*e, "spike", "X_F_range");
      if (v.size() != 2) doc.fail(*e, "spike", "X_F_range", "expects two numbers 'lo, hi'");
      cfg.X_F_range = std::make_pair(v[0], v[1]);
    }
    if (const Entry* e = doc.find("spike", "het_a0")) cfg.het_a0 = get.number(*e, "spike", "het_a0");
    get.opt("spike", "het_offset", cfg.het_offset);
    get.opt("spike", "rate_bin", cfg.exp.rate_bin);
    get.opt("spike", "kink_agents", cfg.exp.kink_agents);
  }

  // [experiment]
  {
    ExperimentParams& x = cfg.exp;
    if (const Entry* e = doc.find("experiment", "Ns")) x.Ns = get.integers(*e, "experiment", "Ns");
    get.opt("experiment", "n_ref", x.n_ref);
    if (const Entry* e = doc.find("experiment", "t_checks")) x.t_checks = get.numbers(*e, "experiment", "t_checks");
    get.opt("experiment", "n_reps", x.n_reps);
    get.opt("experiment", "n_iters", x.n_iters);
    get.opt("experiment", "n_paths", x.n_paths);
    get.opt("experiment", "n_probe", x.n_probe);
    get.opt("experiment", "perturb", x.perturb);
  }
  doc.reject_unused();

  // invariants, each attributed to the key that controls it
  const SimConfig& s = cfg.sim;
  checked(doc, "sim", "N", [&] { if (s.N == 0) throw UsageError("N must be positive"); });
  checked(doc, "sim", "d", [&] { if (s.d == 0) throw UsageError("d must be positive"); });
  checked(doc, "sim", "dt", [&] { if (!(s.dt > 0)) throw UsageError("dt must be positive"); });
  checked(doc, "sim", "T", [&] { if (!(s.T >= s.dt)) throw UsageError("T must be at least dt"); });
  checked(doc, "sim", "sigma", [&] { if (!(s.sigma >= 0)) throw UsageError("sigma must be >= 0"); });
  checked(doc, "sim", "theta", [&] { if (s.theta && !(*s.theta > 0)) throw UsageError("theta must be positive"); });
  checked(doc, "sim", "radius", [&] { if (s.radius && !(*s.radius > 0)) throw UsageError("radius must be positive"); });
  checked(doc, "sim", "record_every", [&] { if (s.record_every == 0) throw UsageError("record_every must be positive"); });
  checked(doc, "field", "kind", [&] {
    if (auto rd = s.field->required_dim(); rd && *rd != s.d)
      throw UsageError("field '" + cfg.field_kind + "' requires d = " + std::to_string(*rd));
  });
  if (cfg.has_spike || cfg.mode == Mode::Spiking) {
    checked(doc, "spike", "X_R", [&] { cfg.spike_config().validate(); });
    checked(doc, "spike", "het_a0", [&] {
      if (cfg.het_a0 && !(*cfg.het_a0 >= 0)) throw UsageError("het_a0 must be >= 0");
      if (cfg.het_a0 && !s.field->accepts_signed_labels())
        throw UsageError("field '" + cfg.field_kind + "' cannot take signed label arguments");
    });
    checked(doc, "spike", "rate_bin", [&] { if (!(cfg.exp.rate_bin > 0)) throw UsageError("rate_bin must be positive"); });
  }
  const ExperimentParams& x = cfg.exp;
  checked(doc, "experiment", "Ns", [&] {
    if (x.Ns.empty()) throw UsageError("Ns must not be empty");
    for (std::size_t j = 0; j < x.Ns.size(); ++j) {
      if (x.Ns[j] == 0) throw UsageError("Ns entries must be positive");
      if (j && !(x.Ns[j] > x.Ns[j - 1])) throw UsageError("Ns must be strictly increasing");
    }
  });
  checked(doc, "experiment", "n_ref", [&] {
    if (x.n_ref && x.n_ref < x.Ns.back()) throw UsageError("n_ref must be at least the largest N");
  });
  checked(doc, "experiment", "t_checks", [&] {
    for (double t : x.t_checks) {
      const double k = t / s.dt;
      if (!(t >= 0) || t > s.T * (1 + 1e-12) || std::abs(k - std::round(k)) > 1e-6)
        throw UsageError("check time " + format_double(t) + " is not a grid time in [0, T]");
    }
  });
  checked(doc, "experiment", "n_reps", [&] { if (x.n_reps == 0) throw UsageError("n_reps must be positive"); });
  checked(doc, "experiment", "n_paths", [&] { if (x.n_paths == 0) throw UsageError("n_paths must be positive"); });
  checked(doc, "experiment", "n_probe", [&] { if (x.n_probe < 2) throw UsageError("n_probe must be >= 2"); });
  checked(doc, "experiment", "n_iters", [&] {
    if (cfg.mode == Mode::Picard && x.n_iters < 4) throw UsageError("picard mode needs n_iters >= 4");
  });
  checked(doc, "experiment", "perturb", [&] { if (!(x.perturb >= 0)) throw UsageError("perturb must be >= 0"); });
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream o;
  const SimConfig& s = cfg.sim;
  o << "[run]\n";
  o << "mode = " << to_string(cfg.mode) << "\n";
  o << "seed = " << cfg.seed << "\n";
  o << "out = " << cfg.out_dir << "\n";
  o << "emit_svg = " << (cfg.emit_svg ? "true" : "false") << "\n";
  o << "\n[sim]\n";
  o << "N = " << s.N << "\n";
  o << "d = " << s.d << "\n";
  o << "dt = " << format_double(s.dt) << "\n";
  o << "T = " << format_double(s.T) << "\n";
  o << "sigma = " << format_double(s.sigma) << "\n";
  o << "theta = " << (s.theta ? format_double(*s.theta) : std::string("auto")) << "\n";
  o << "radius = " << (s.radius ? format_double(*s.radius) : std::string("auto")) << "\n";
  o << "record_every = " << s.record_every << "\n";
  o << "record_noise = " << (s.record_noise ? "true" : "false") << "\n";
  o << "\n[labels]\n";
  if (!cfg.labels_table.empty()) o << "table = " << cfg.labels_table << "\n";
  else o << "atoms = " << join(cfg.atoms) << "\n";
  o << "\n[field]\n";
  o << "kind = " << cfg.field_kind << "\n";
  for (const auto& [k, v] : cfg.field_params) o << k << " = " << format_double(v) << "\n";
  o << "\n[initial]\n";
  const InitialLaw& law = cfg.initial;
  o << "position = " << to_string(law.position) << "\n";
  o << "x_a = " << format_double(law.x_a) << "\n";
  o << "x_b = " << format_double(law.x_b) << "\n";
  o << "label = " << to_string(law.label) << "\n";
  o << "alpha = " << format_double(law.alpha) << "\n";
  if (!law.fixed.empty()) o << "fixed = " << join(law.fixed) << "\n";
  o << "dirac = " << law.dirac_atom << "\n";
  if (cfg.has_spike) {
    o << "\n[spike]\n";
    o << "X_F = " << format_double(cfg.X_F) << "\n";
    o << "X_R = " << format_double(cfg.X_R) << "\n";
    if (cfg.X_F_range) o << "X_F_range = " << format_double(cfg.X_F_range->first) << ", " << format_double(cfg.X_F_range->second) << "\n";
    if (cfg.het_a0) o << "het_a0 = " << format_double(*cfg.het_a0) << "\n";
    o << "het_offset = " << cfg.het_offset << "\n";
    o << "rate_bin = " << format_double(cfg.exp.rate_bin) << "\n";
    o << "kink_agents = " << cfg.exp.kink_agents << "\n";
  }
  const ExperimentParams& x = cfg.exp;
  o << "\n[experiment]\n";
  o << "Ns = " << join(x.Ns) << "\n";
  o << "n_ref = " << x.n_ref << "\n";
  if (!x.t_checks.empty()) o << "t_checks = " << join(x.t_checks) << "\n";
  o << "n_reps = " << x.n_reps << "\n";
  o << "n_iters = " << x.n_iters << "\n";
  o << "n_paths = " << x.n_paths << "\n";
  o << "n_probe = " << x.n_probe << "\n";
  o << "perturb = " << format_double(x.perturb) << "\n";
  return o.str();
}

}  // namespace mflab
