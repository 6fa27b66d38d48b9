#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mflab {

class BlNormEvaluator;

/// Finite metric space of label atoms (the compact label set U with d_U).
///
/// Every atom also carries a real coordinate. For numeric atom ids the
/// coordinate is the parsed id, otherwise the atom index; coordinates are
/// what "mean label value" pairings integrate against.
class LabelSpace {
 public:
  /// `dist` is the K x K distance matrix in row-major order. Throws
  /// InvariantError unless it is a metric (zero diagonal, symmetric, positive
  /// off-diagonal, triangle inequality within 1e-12).
  LabelSpace(std::vector<std::string> ids, std::vector<double> dist);
  ~LabelSpace();

  LabelSpace(const LabelSpace&) = delete;
  LabelSpace& operator=(const LabelSpace&) = delete;

  /// Atoms on the real line with d(u, v) = |u - v|.
  static std::shared_ptr<const LabelSpace> line(const std::vector<double>& values);
  static std::shared_ptr<const LabelSpace> make(std::vector<std::string> ids,
                                                std::vector<double> dist);

  std::size_t size() const { return ids_.size(); }
  double dist(std::size_t i, std::size_t j) const { return dist_[i * size() + j]; }
  std::span<const double> dist_matrix() const { return dist_; }
  double diameter() const { return diameter_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> coords() const { return coords_; }
  double coord(std::size_t i) const { return coords_[i]; }

  /// True when d(u_i, u_j) = |coord_i - coord_j| for all pairs.
  bool is_line_metric() const { return line_metric_; }
  std::size_t argmin_coord() const { return lo_; }
  std::size_t argmax_coord() const { return hi_; }

  /// Atom order sorted by coordinate (used by the line-metric fast path).
  std::span<const std::size_t> coord_order() const { return order_; }

  const BlNormEvaluator& bl_evaluator() const { return *bl_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> dist_;
  std::vector<double> coords_;
  std::vector<std::size_t> order_;
  double diameter_ = 0.0;
  bool line_metric_ = false;
  std::size_t lo_ = 0, hi_ = 0;
  std::unique_ptr<BlNormEvaluator> bl_;
};

using LabelSpacePtr = std::shared_ptr<const LabelSpace>;

/// Plain-text table: one row per atom, `id d_1 ... d_K`, '#' comments allowed.
void write_label_space(std::ostream& out, const LabelSpace& space);
LabelSpacePtr read_label_space(std::istream& in);

}  // namespace mflab
