#include "mflab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mflab/errors.hpp"

namespace mflab::lp {
namespace {

constexpr double kEps = 1e-11;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double& obj(std::size_t c) { return at(rows_, c); }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
};

// Runs simplex iterations on the objective row until optimal. Columns with
// `allowed[c] == false` never enter. Returns false when unbounded.
bool iterate(Tableau& t, std::vector<std::size_t>& basis, const std::vector<bool>& allowed) {
  for (;;) {
    std::size_t enter = t.cols();
    for (std::size_t c = 0; c < t.cols(); ++c) {
      if (allowed[c] && t.obj(c) < -kEps) {
        enter = c;
        break;
      }
    }
    if (enter == t.cols()) return true;

    std::size_t leave = t.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= kEps) continue;
      const double ratio = t.rhs(r) / a;
      const bool tie = leave < t.rows() && std::abs(ratio - best) <= kEps;
      if (leave == t.rows() || ratio < best - kEps || (tie && basis[r] < basis[leave])) {
        best = std::min(best, ratio);
        leave = r;
      }
    }
    if (leave == t.rows()) return false;
    t.pivot(leave, enter);
    basis[leave] = enter;
  }
}

}  // namespace

Result solve(const Program& program) {
  const std::size_t n = program.n_vars;
  const std::size_t m = program.rows.size();
  if (program.objective.size() != n) throw UsageError("lp: objective size mismatch");

  // Normalize to nonnegative right-hand sides.
  std::vector<Constraint> rows = program.rows;
  std::size_t n_slack = 0, n_art = 0;
  for (auto& row : rows) {
    if (row.coef.size() != n) throw UsageError("lp: constraint size mismatch");
    if (row.rhs < 0) {
      for (double& v : row.coef) v = -v;
      row.rhs = -row.rhs;
      if (row.rel == Relation::LessEq)
        row.rel = Relation::GreaterEq;
      else if (row.rel == Relation::GreaterEq)
        row.rel = Relation::LessEq;
    }
    if (row.rel != Relation::Equal) ++n_slack;
    if (row.rel != Relation::LessEq) ++n_art;
  }

  const std::size_t art0 = n + n_slack;
  const std::size_t cols = art0 + n_art;
  Tableau t(m, cols);
  std::vector<std::size_t> basis(m);
  std::size_t slack = n, art = art0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) t.at(r, c) = rows[r].coef[c];
    t.rhs(r) = rows[r].rhs;
    switch (rows[r].rel) {
      case Relation::LessEq:
        t.at(r, slack) = 1.0;
        basis[r] = slack++;
        break;
      case Relation::GreaterEq:
        t.at(r, slack++) = -1.0;
        t.at(r, art) = 1.0;
        basis[r] = art++;
        break;
      case Relation::Equal:
        t.at(r, art) = 1.0;
        basis[r] = art++;
        break;
    }
  }

  std::vector<bool> allowed(cols, true);

  if (n_art > 0) {
    // Phase 1: maximize -(sum of artificials).
    for (std::size_t c = art0; c < cols; ++c) t.obj(c) = 1.0;
    t.obj(cols) = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < art0) continue;
      for (std::size_t c = 0; c <= cols; ++c) t.obj(c) -= t.at(r, c);
    }
    iterate(t, basis, allowed);
    if (t.obj(cols) < -1e-9) return {Status::Infeasible, 0.0, {}};

    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c) {
        if (std::abs(t.at(r, c)) > kEps) {
          t.pivot(r, c);
          basis[r] = c;
          break;
        }
      }
    }
    for (std::size_t c = art0; c < cols; ++c) allowed[c] = false;
  }

  // Phase 2.
  for (std::size_t c = 0; c <= cols; ++c) t.obj(c) = 0.0;
  for (std::size_t c = 0; c < n; ++c) t.obj(c) = -program.objective[c];
  for (std::size_t r = 0; r < m; ++r) {
    const double f = t.obj(basis[r]);
    if (f == 0.0) continue;
    for (std::size_t c = 0; c <= cols; ++c) t.obj(c) -= f * t.at(r, c);
  }
  if (!iterate(t, basis, allowed)) return {Status::Unbounded, 0.0, {}};

  Result res;
  res.status = Status::Optimal;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) res.x[basis[r]] = t.rhs(r);
  res.value = 0.0;
  for (std::size_t c = 0; c < n; ++c) res.value += program.objective[c] * res.x[c];
  return res;
}

}  // namespace mflab::lp
