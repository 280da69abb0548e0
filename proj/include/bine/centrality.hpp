#pragma once

#include <vector>

#include "bine/graph.hpp"

namespace bine {

enum class CentralityMethod { Hits, Degree };

/// Per-vertex importance on one side, rescaled so the maximum is 1.
struct CentralityScores {
  Side side = Side::U;
  std::vector<double> scores;
};

struct CentralityResult {
  CentralityScores u;
  CentralityScores v;
  int iterations = 0;
  bool converged = true;
};

inline constexpr double kDefaultCentralityTol = 1e-8;
inline constexpr int kDefaultCentralityMaxIter = 100;

/// HITS on W: hubs on U, authorities on V, L2-normalized each half step,
/// stopped when both vectors move less than `tol` in L-infinity. On
/// non-convergence the last iterate is returned with converged = false and a
/// warning. Degree mode returns weighted degrees. Isolated vertices score 0.
CentralityResult compute_centrality(const BipartiteGraph& graph, CentralityMethod method = CentralityMethod::Hits,
                                    double tol = kDefaultCentralityTol, int max_iter = kDefaultCentralityMaxIter);

}  // namespace bine
