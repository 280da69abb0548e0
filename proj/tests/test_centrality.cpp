#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bine/centrality.hpp"
#include "bine/random.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace bine;

TEST_CASE("complete K2,2 scores are all one") {
  const BipartiteGraph g(2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}});
  const auto r = compute_centrality(g);
  for (double s : r.u.scores) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  for (double s : r.v.scores) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.converged);
}

TEST_CASE("star graph matches the power-iteration oracle") {
  const BipartiteGraph g(2, 3, {{0, 0, 1}, {0, 1, 1}, {0, 2, 1}, {1, 0, 1}});
  const auto r = compute_centrality(g);
  const auto o = oracles::hits(g, 1e-12, 10000);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(r.u.scores[i] - o.hub[i]) <= 1e-8);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(r.v.scores[j] - o.authority[j]) <= 1e-8);
  CHECK(r.u.scores[0] == 1.0);
  CHECK(r.v.scores[0] == 1.0);
}

TEST_CASE("degree mode") {
  const BipartiteGraph g(2, 2, {{0, 0, 2}, {0, 1, 1}, {1, 1, 1}});
  const auto r = compute_centrality(g, CentralityMethod::Degree);
  CHECK(r.u.scores[0] == 1.0);
  CHECK(r.u.scores[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.v.scores[0] == 1.0);
  CHECK(r.v.scores[1] == 1.0);
}

TEST_CASE("isolated vertices score zero") {
  const BipartiteGraph g(3, 3, {{0, 0, 1}, {1, 1, 2}});
  for (auto method : {CentralityMethod::Hits, CentralityMethod::Degree}) {
    const auto r = compute_centrality(g, method);
    CHECK(r.u.scores[2] == 0.0);
    CHECK(r.v.scores[2] == 0.0);
  }
}

TEST_CASE("fixed point and scale invariance") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = fixtures::random_graph(3 + rng.index(15), 3 + rng.index(15), 0.4, rng);
    const auto r = compute_centrality(g, CentralityMethod::Hits, 1e-10, 100000);
    REQUIRE(r.converged);

    // One more alternating step from the returned vectors.
    const auto w = oracles::dense_weights(g);
    std::vector<double> a(g.v_count(), 0.0), h(g.u_count(), 0.0);
    auto unit = [](std::vector<double> x) {
      double s = 0;
      for (double t : x) s += t * t;
      for (double& t : x) t /= std::sqrt(s);
      return x;
    };
    const auto h0 = unit(r.u.scores);
    const auto a0 = unit(r.v.scores);
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t i = 0; i < h.size(); ++i) a[j] += w[i][j] * h0[i];
    a = unit(a);
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) h[i] += w[i][j] * a[j];
    h = unit(h);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(h[i] - h0[i]) < 1e-10);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(a[j] - a0[j]) < 1e-10);

    std::vector<Edge> scaled(g.edges().begin(), g.edges().end());
    for (Edge& e : scaled) e.weight *= 7.25;
    const auto s = compute_centrality(BipartiteGraph(g.u_count(), g.v_count(), scaled), CentralityMethod::Hits,
                                      1e-10, 100000);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(s.u.scores[i] - r.u.scores[i]) <= 1e-10);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(s.v.scores[j] - r.v.scores[j]) <= 1e-10);
  }
}

TEST_CASE("non-convergence returns the last iterate") {
  const auto g = fixtures::benchmark_graph();
  const auto r = compute_centrality(g, CentralityMethod::Hits, 1e-300, 3);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.u.scores.size() == 20);
  CHECK(*std::max_element(r.u.scores.begin(), r.u.scores.end()) == 1.0);
}
