#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bine/centrality.hpp"
#include "bine/eval.hpp"
#include "bine/graph.hpp"
#include "bine/mf.hpp"
#include "bine/negatives.hpp"
#include "bine/trainer.hpp"
#include "bine/walks.hpp"

namespace bine {

enum class WalkMode { Projection, TwoStep };
enum class ImplicitSource { Auto, Analytic, Empirical };
enum class EmbedMethod { Online, Mf };

/// Every hyperparameter of a run. Component seeds are derived from `seed`
/// by resolve_seeds().
struct RunConfig {
  std::string command;
  std::string edges;
  std::string output;
  std::uint64_t seed = 0;
  std::size_t dim = 128;
  Task task = Task::Recommendation;

  CentralityMethod centrality = CentralityMethod::Hits;
  WalkMode walk_mode = WalkMode::Projection;
  WalkConfig walk;
  int lsh_rows = 2;
  int lsh_bands = 8;
  ShingleScope shingle_scope = ShingleScope::BothSides;
  std::uint64_t lsh_seed = 0;
  TrainConfig train;

  double alpha_prime = 0.01;
  double beta_prime = 0.01;
  ImplicitSource implicit = ImplicitSource::Auto;
  FactorizeConfig mf;

  EmbedMethod method = EmbedMethod::Online;
  SplitSpec split;
  int k = 10;
  CandidatePolicy candidates = CandidatePolicy::ExcludeTrain;
  LogisticConfig logistic;
  std::uint64_t eval_seed = 0;

  SlopeBinning binning = SlopeBinning::Log2Tail;

  void resolve_seeds();
  /// Throws ConfigError when a component invariant does not hold.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

Corpus build_corpus(const BipartiteGraph& graph, Side side, const CentralityResult& centrality,
                    const RunConfig& config);

/// Online training: walks, corpus statistics, negative samplers, then the
/// joint SGD loop.
EmbeddingSet embed_online(const BipartiteGraph& graph, const RunConfig& config, const EpochCallback& on_epoch = {});

/// Closed-form path: implicit matrices, block assembly and factorization.
Factorization embed_mf(const BipartiteGraph& graph, const RunConfig& config);

EmbeddingSet embed(const BipartiteGraph& graph, const RunConfig& config);

}  // namespace bine
