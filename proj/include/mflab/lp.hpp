#pragma once

#include <cstddef>
#include <vector>

namespace mflab::lp {

enum class Relation { LessEq, Equal, GreaterEq };

struct Constraint {
  std::vector<double> coef;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

/// maximize objective . x  subject to the rows, x >= 0.
struct Program {
  std::size_t n_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> rows;

  void add(std::vector<double> coef, Relation rel, double rhs) {
    rows.push_back({std::move(coef), rel, rhs});
  }
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  double value = 0.0;
  std::vector<double> x;
};

// Dense two-phase tableau simplex with Bland's rule. Intended for the small
// programs that come out of finite label spaces and tiny transport problems.
Result solve(const Program& program);

}  // namespace mflab::lp
