#include "bine/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bine {

namespace {

void normalize_l2(std::vector<double>& x) {
  double norm = 0.0;
  for (double v : x) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (double& v : x) v /= norm;
}

void rescale_max(std::vector<double>& x) {
  const double peak = x.empty() ? 0.0 : *std::max_element(x.begin(), x.end());
  if (peak > 0)
    for (double& v : x) v /= peak;
}

double linf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

CentralityResult compute_centrality(const BipartiteGraph& graph, CentralityMethod method, double tol, int max_iter) {
  if (graph.empty()) throw ConfigError("centrality requires a nonempty graph");
  if (!(tol > 0)) throw ConfigError("centrality tolerance must be positive");
  if (max_iter < 1) throw ConfigError("centrality max_iter must be >= 1");

  const std::size_t nu = graph.u_count();
  const std::size_t nv = graph.v_count();
  CentralityResult result;
  result.u.side = Side::U;
  result.v.side = Side::V;

  if (method == CentralityMethod::Degree) {
    result.u.scores.resize(nu);
    result.v.scores.resize(nv);
    for (VertexId i = 0; i < nu; ++i) result.u.scores[i] = graph.weighted_degree(Side::U, i);
    for (VertexId j = 0; j < nv; ++j) result.v.scores[j] = graph.weighted_degree(Side::V, j);
    rescale_max(result.u.scores);
    rescale_max(result.v.scores);
    return result;
  }

  std::vector<double> hub(nu, 1.0);
  std::vector<double> auth(nv, 0.0);
  std::vector<double> next_hub(nu);
  std::vector<double> next_auth(nv);
  result.converged = false;
  for (int iter = 1; iter <= max_iter; ++iter) {
    for (VertexId j = 0; j < nv; ++j) {
      double s = 0.0;
      for (const Neighbor& n : graph.neighbors(Side::V, j)) s += n.weight * hub[n.id];
      next_auth[j] = s;
    }
    normalize_l2(next_auth);
    for (VertexId i = 0; i < nu; ++i) {
      double s = 0.0;
      for (const Neighbor& n : graph.neighbors(Side::U, i)) s += n.weight * next_auth[n.id];
      next_hub[i] = s;
    }
    normalize_l2(next_hub);

    const double change = std::max(linf_distance(hub, next_hub), linf_distance(auth, next_auth));
    hub.swap(next_hub);
    auth.swap(next_auth);
    result.iterations = iter;
    // The first iterate is compared against the unnormalized start vector,
    // so it never counts as converged.
    if (iter > 1 && change < tol) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    warn("HITS did not converge within " + std::to_string(max_iter) + " iterations; returning last iterate");

  rescale_max(hub);
  rescale_max(auth);
  result.u.scores = std::move(hub);
  result.v.scores = std::move(auth);
  return result;
}

}  // namespace bine
