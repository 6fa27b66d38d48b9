#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mflab/ensemble.hpp"
#include "mflab/label_space.hpp"
#include "mflab/lp.hpp"
#include "mflab/measures.hpp"

namespace oracle {

using namespace mflab;

/// BL norm as a transport problem on U plus a sink point at distance 1 from
/// every atom, with the metric truncated at 2.
inline double bl_truncated_transport(const LabelSpace& space, const std::vector<double>& w) {
  const std::size_t K = space.size(), M = K + 1;
  std::vector<double> src(M, 0.0), dst(M, 0.0);
  double pos = 0, neg = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (w[k] > 0) src[k] = w[k], pos += w[k];
    else dst[k] = -w[k], neg -= w[k];
  }
  src[K] = neg;
  dst[K] = pos;
  auto cost = [&](std::size_t i, std::size_t j) {
    if (i == j) return 0.0;
    if (i == K || j == K) return 1.0;
    return std::min(space.dist(i, j), 2.0);
  };
  lp::Program p;
  p.n_vars = M * M;
  p.objective.resize(M * M);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < M; ++j) p.objective[i * M + j] = -cost(i, j);
  for (std::size_t i = 0; i < M; ++i) {
    std::vector<double> row(M * M, 0.0);
    for (std::size_t j = 0; j < M; ++j) row[i * M + j] = 1;
    p.add(row, lp::Relation::Equal, src[i]);
  }
  for (std::size_t j = 0; j < M; ++j) {
    std::vector<double> row(M * M, 0.0);
    for (std::size_t i = 0; i < M; ++i) row[i * M + j] = 1;
    p.add(row, lp::Relation::Equal, dst[j]);
  }
  const auto r = lp::solve(p);
  return -r.value;
}

/// W1 on labels from the Kantorovich dual: max <phi, mu1 - mu2> over
/// 1-Lipschitz phi with 0 <= phi <= diameter.
inline double w1_dual(const LabelSpace& space, const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t K = space.size();
  lp::Program p;
  p.n_vars = K;
  for (std::size_t k = 0; k < K; ++k) p.objective.push_back(a[k] - b[k]);
  for (std::size_t i = 0; i < K; ++i) {
    std::vector<double> bound(K, 0.0);
    bound[i] = 1;
    p.add(bound, lp::Relation::LessEq, space.diameter());
    for (std::size_t j = 0; j < K; ++j) {
      if (i == j) continue;
      std::vector<double> row(K, 0.0);
      row[i] = 1;
      row[j] = -1;
      p.add(row, lp::Relation::LessEq, space.dist(i, j));
    }
  }
  return lp::solve(p).value;
}

/// W1 on a line metric: integral of |F_a - F_b|.
inline double w1_line(const LabelSpace& space, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::size_t> order(space.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return space.coord(i) < space.coord(j); });
  double F = 0, acc = 0;
  for (std::size_t r = 0; r + 1 < order.size(); ++r) {
    F += a[order[r]] - b[order[r]];
    acc += std::abs(F) * (space.coord(order[r + 1]) - space.coord(order[r]));
  }
  return acc;
}

/// W1 between two uniform empirical measures of equal size by enumerating
/// every permutation, with the ground cost built from the BL oracle.
inline double w1_permutations(const EmpiricalMeasure& P, const EmpiricalMeasure& Q) {
  const std::size_t n = P.size();
  const LabelSpace& space = *P.space();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = P.agent(i), b = Q.agent(j);
      double dx = 0;
      for (std::size_t c = 0; c < a.x.size(); ++c) dx += (a.x[c] - b.x[c]) * (a.x[c] - b.x[c]);
      std::vector<double> diff(space.size());
      for (std::size_t k = 0; k < space.size(); ++k) diff[k] = a.lambda[k] - b.lambda[k];
      cost[i * n + j] = std::sqrt(dx) + bl_truncated_transport(space, diff);
    }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += cost[i * n + perm[i]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

// ------------------------------------------------------------ generators

/// Random finite metric space with 2..max_k atoms: points in the plane
/// under the Euclidean metric, scaled so diameters fall on both sides of 2.
inline LabelSpacePtr random_space(std::mt19937_64& g, std::size_t max_k = 4) {
  std::uniform_int_distribution<std::size_t> kd(2, max_k);
  std::uniform_real_distribution<double> u(0, 1), scale(0.2, 4.0);
  const std::size_t K = kd(g);
  const double s = scale(g);
  if (u(g) < 0.5) {
    std::vector<double> v;
    while (v.size() < K) {
      const double c = std::round(s * u(g) * 1e6) / 1e6;
      if (std::find(v.begin(), v.end(), c) == v.end()) v.push_back(c);
    }
    return LabelSpace::line(v);
  }
  std::vector<double> px(K), py(K);
  for (std::size_t k = 0; k < K; ++k) px[k] = s * u(g), py[k] = s * u(g);
  std::vector<double> d(K * K);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) d[i * K + j] = std::hypot(px[i] - px[j], py[i] - py[j]) + (i == j ? 0 : 1e-3);
  // the offset keeps distinct atoms apart and preserves the triangle inequality
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < K; ++k) ids.push_back("p" + std::to_string(k));
  return LabelSpace::make(ids, d);
}

inline std::vector<double> random_probability(std::mt19937_64& g, std::size_t K) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> w(K);
  double s = 0;
  for (auto& v : w) {
    v = u(g) < 0.2 ? 0.0 : e(g);
    s += v;
  }
  if (s == 0) {
    w[0] = 1;
    return w;
  }
  for (auto& v : w) v /= s;
  return w;
}

inline std::vector<double> random_signed(std::mt19937_64& g, std::size_t K) {
  std::normal_distribution<double> n(0, 1);
  std::vector<double> w(K);
  for (auto& v : w) v = n(g);
  return w;
}

inline EmpiricalMeasure random_ensemble(std::mt19937_64& g, const LabelSpacePtr& space, std::size_t n,
                                        std::size_t dim) {
  std::normal_distribution<double> nd(0, 1);
  std::vector<double> x(n * dim), lam;
  for (auto& v : x) v = nd(g);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = random_probability(g, space->size());
    lam.insert(lam.end(), w.begin(), w.end());
  }
  return EmpiricalMeasure(space, dim, std::move(x), std::move(lam));
}

}  // namespace oracle
