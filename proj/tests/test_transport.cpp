#include "doctest.h"

#include "mflab/errors.hpp"
#include "mflab/wasserstein.hpp"
#include "oracles.hpp"

using namespace mflab;

TEST_CASE("w1_product trivial cases") {
  std::mt19937_64 g(1);
  auto space = LabelSpace::line({0, 0.5, 1});
  const auto P = oracle::random_ensemble(g, space, 5, 2);
  CHECK(w1_product(P, P) == doctest::Approx(0.0).epsilon(1e-12));
  const auto a = oracle::random_ensemble(g, space, 1, 2), b = oracle::random_ensemble(g, space, 1, 2);
  CHECK(w1_product(a, b) == doctest::Approx(energy_distance(*space, a.agent(0), b.agent(0))));
}

TEST_CASE("w1_product equals the permutation oracle") {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto space = oracle::random_space(g, 4);
    const std::size_t n = 1 + trial % 6, dim = 1 + trial % 2;
    const auto P = oracle::random_ensemble(g, space, n, dim);
    const auto Q = oracle::random_ensemble(g, space, n, dim);
    const double expect = oracle::w1_permutations(P, Q);
    CHECK(w1_product(P, Q) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(w1_product_lp(P, Q) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("w1_product with unequal sizes: replication and LP agree") {
  std::mt19937_64 g(9);
  auto space = LabelSpace::line({0, 1, 3});
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{2, 3}, {3, 5}, {4, 6}, {1, 7}}) {
    const auto P = oracle::random_ensemble(g, space, n, 1);
    const auto Q = oracle::random_ensemble(g, space, m, 1);
    CHECK(w1_product(P, Q) == doctest::Approx(w1_product_lp(P, Q)).epsilon(1e-9));
    CHECK(w1_product(P, Q) == doctest::Approx(w1_product(Q, P)).epsilon(1e-9));
  }
}

TEST_CASE("w1_product on fixed labels reduces to 1-D W1") {
  std::mt19937_64 g(13);
  std::normal_distribution<double> nd;
  auto space = LabelSpace::line({0, 1});
  std::vector<double> xa(5), xb(8), la, lb;
  for (auto& v : xa) v = nd(g);
  for (auto& v : xb) v = nd(g);
  for (std::size_t i = 0; i < 5; ++i) la.insert(la.end(), {0.3, 0.7});
  for (std::size_t i = 0; i < 8; ++i) lb.insert(lb.end(), {0.3, 0.7});
  EmpiricalMeasure A(space, 1, xa, la), B(space, 1, xb, lb);
  // 1-D W1 of the position marginals by quantile coupling on 40 = lcm(5, 8) points
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  double acc = 0;
  for (std::size_t k = 0; k < 40; ++k) acc += std::abs(xa[k / 8] - xb[k / 5]);
  CHECK(w1_product(A, B) == doctest::Approx(acc / 40).epsilon(1e-12));
}

TEST_CASE("w1_product rejects mismatched layouts") {
  std::mt19937_64 g(2);
  auto s1 = LabelSpace::line({0, 1}), s2 = LabelSpace::line({0, 2});
  const auto P = oracle::random_ensemble(g, s1, 3, 1);
  CHECK_THROWS_AS(w1_product(P, oracle::random_ensemble(g, s2, 3, 1)), UsageError);
  CHECK_THROWS_AS(w1_product(P, oracle::random_ensemble(g, s1, 3, 2)), UsageError);
}

TEST_CASE("ground cost matrix: parallel and serial are bit-identical") {
  std::mt19937_64 g(4);
  auto space = oracle::random_space(g, 4);
  const auto P = oracle::random_ensemble(g, space, 37, 2);
  const auto Q = oracle::random_ensemble(g, space, 29, 2);
  const auto a = ground_cost_matrix(P, Q), b = ground_cost_matrix_serial(P, Q);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("energy norm") {
  auto space = LabelSpace::line({0, 1});
  std::vector<double> x{3, 4}, l{0.25, 0.75};
  const AgentRef y{x, l};
  CHECK(euclidean_norm(x) == doctest::Approx(5.0));
  CHECK(energy_norm(*space, y) == doctest::Approx(6.0));
}
