#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bine/graph.hpp"
#include "bine/matrix.hpp"
#include "bine/negatives.hpp"
#include "bine/walks.hpp"

namespace bine {

/// Vertex embeddings and context vectors for both sides.
struct EmbeddingSet {
  std::size_t dim = 0;
  Matrix u_emb;
  Matrix v_emb;
  Matrix u_ctx;  // theta
  Matrix v_ctx;  // vartheta

  Matrix& embeddings(Side side) { return side == Side::U ? u_emb : v_emb; }
  const Matrix& embeddings(Side side) const { return side == Side::U ? u_emb : v_emb; }
  Matrix& contexts(Side side) { return side == Side::U ? u_ctx : v_ctx; }
  const Matrix& contexts(Side side) const { return side == Side::U ? u_ctx : v_ctx; }

  bool all_finite() const;
  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

struct TrainConfig {
  double alpha = 0.01;
  double beta = 0.01;
  double gamma = 0.1;
  double lr = 0.025;
  int ns = 4;
  int ws = 5;
  int bs = 4;
  int epochs = 100;
  NegativeStrategy strategy = NegativeStrategy::Lsh;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Embedding entries uniform on [-0.5/d, 0.5/d]; context vectors zero.
EmbeddingSet init_embeddings(std::size_t u_count, std::size_t v_count, std::size_t dim, std::uint64_t seed);

/// Step I on one edge: both vectors move along w * (1 - sigmoid(u.v)) times
/// the other vector, scaled by lr * gamma, computed from pre-update values.
void explicit_step(EmbeddingSet& emb, VertexId u, VertexId v, double weight, double gamma, double lr);

/// Step II for one center-context pair on `side` against `negatives`.
/// All gradients are taken at the pre-update values.
void implicit_step(EmbeddingSet& emb, Side side, VertexId center, VertexId context,
                   std::span<const VertexId> negatives, double weight, double lr);

/// Corpus statistics and samplers for both sides.
struct ImplicitInputs {
  const CorpusStats* u_stats = nullptr;
  const CorpusStats* v_stats = nullptr;
  const NegativeSampler* u_sampler = nullptr;
  const NegativeSampler* v_sampler = nullptr;

  const CorpusStats& stats(Side side) const { return side == Side::U ? *u_stats : *v_stats; }
  const NegativeSampler& sampler(Side side) const { return side == Side::U ? *u_sampler : *v_sampler; }
};

struct ObjectiveValues {
  double o1 = 0.0;      // -sum_E w log sigmoid(u.v)
  double log_o2 = 0.0;  // negative-sampling proxy on the U corpus
  double log_o3 = 0.0;  // negative-sampling proxy on the V corpus
};

ObjectiveValues objective_components(const BipartiteGraph& graph, const ImplicitInputs& inputs,
                                     const EmbeddingSet& emb, const TrainConfig& config);

/// O1 alone; needs no corpus.
double explicit_objective(const BipartiteGraph& graph, const EmbeddingSet& emb);

/// Called after each epoch with the 1-based epoch number.
using EpochCallback = std::function<void(int epoch, const EmbeddingSet& emb)>;

/// Joint training. Each epoch visits the edges in a seeded shuffled order,
/// runs Step I on the edge, then for each endpoint draws bs contexts in
/// proportion to its co-occurrence counts and runs Step II with ns fresh
/// negatives per context. Throws DivergenceError on a non-finite update.
EmbeddingSet train(const BipartiteGraph& graph, const ImplicitInputs& inputs, const TrainConfig& config,
                   EmbeddingSet emb, const EpochCallback& on_epoch = {});

/// "count dim" header, then "token v1 ... vd" per vertex.
void write_embeddings(std::ostream& out, const Matrix& vectors, const std::vector<std::string>& tokens);
/// Returns the vectors in file order together with the tokens.
Matrix read_embeddings(std::istream& in, std::vector<std::string>* tokens = nullptr);

}  // namespace bine
