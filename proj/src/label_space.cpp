#include "mflab/label_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mflab/errors.hpp"
#include "mflab/measures.hpp"

namespace mflab {
namespace {

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

LabelSpace::LabelSpace(std::vector<std::string> ids, std::vector<double> dist)
    : ids_(std::move(ids)), dist_(std::move(dist)) {
  const std::size_t k = ids_.size();
  if (k == 0) throw InvariantError("label space needs at least one atom");
  if (dist_.size() != k * k) throw InvariantError("label space distance matrix must be K x K");

  for (std::size_t i = 0; i < k; ++i) {
    if (this->dist(i, i) != 0.0) throw InvariantError("label space: nonzero diagonal distance");
    for (std::size_t j = 0; j < k; ++j) {
      const double d = this->dist(i, j);
      if (!std::isfinite(d)) throw InvariantError("label space: non-finite distance");
      if (i != j && !(d > 0.0)) throw InvariantError("label space: distinct atoms need positive distance");
      if (d != this->dist(j, i)) throw InvariantError("label space: distance matrix not symmetric");
      diameter_ = std::max(diameter_, d);
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t m = 0; m < k; ++m)
        if (this->dist(i, j) > this->dist(i, m) + this->dist(m, j) + 1e-12)
          throw InvariantError("label space: triangle inequality violated");

  bool numeric = true;
  coords_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!parse_double(ids_[i], coords_[i])) numeric = false;
  }
  if (!numeric) std::iota(coords_.begin(), coords_.end(), 0.0);

  line_metric_ = true;
  for (std::size_t i = 0; i < k && line_metric_; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(this->dist(i, j) - std::abs(coords_[i] - coords_[j])) > 1e-12) {
        line_metric_ = false;
        break;
      }

  order_.resize(k);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return coords_[a] < coords_[b]; });
  lo_ = order_.front();
  hi_ = order_.back();

  bl_ = std::make_unique<BlNormEvaluator>(*this);
}

LabelSpace::~LabelSpace() = default;

LabelSpacePtr LabelSpace::make(std::vector<std::string> ids, std::vector<double> dist) {
  return std::make_shared<const LabelSpace>(std::move(ids), std::move(dist));
}

LabelSpacePtr LabelSpace::line(const std::vector<double>& values) {
  const std::size_t k = values.size();
  std::vector<std::string> ids(k);
  std::vector<double> dist(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, values[i]);
    ids[i].assign(buf, res.ptr);
    for (std::size_t j = 0; j < k; ++j) dist[i * k + j] = std::abs(values[i] - values[j]);
  }
  return make(std::move(ids), std::move(dist));
}

void write_label_space(std::ostream& out, const LabelSpace& space) {
  out << "# label space: id followed by the distance-matrix row\n";
  const std::size_t k = space.size();
  for (std::size_t i = 0; i < k; ++i) {
    out << space.ids()[i];
    for (std::size_t j = 0; j < k; ++j) {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, space.dist(i, j));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

LabelSpacePtr read_label_space(std::istream& in) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      double v;
      if (!parse_double(tok, v))
        throw UsageError("label space line " + std::to_string(lineno) + ": bad distance '" + tok + "'");
      row.push_back(v);
    }
    ids.push_back(std::move(id));
    rows.push_back(std::move(row));
  }
  const std::size_t k = ids.size();
  std::vector<double> dist;
  dist.reserve(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    if (rows[i].size() != k)
      throw UsageError("label space row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " distances, expected " + std::to_string(k));
    dist.insert(dist.end(), rows[i].begin(), rows[i].end());
  }
  return LabelSpace::make(std::move(ids), std::move(dist));
}

}  // namespace mflab
