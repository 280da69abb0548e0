#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bine/graph.hpp"
#include "bine/matrix.hpp"
#include "bine/trainer.hpp"

namespace bine {

struct SplitSpec {
  double train_fraction = 0.6;
  int folds = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EdgeSplit {
  BipartiteGraph train;
  std::vector<Edge> test;
};

/// Seeded uniform partition of the edges for one fold. floor(f * m) edges
/// form the train graph, which keeps every vertex and token of the input.
/// Both parts preserve the input edge order.
EdgeSplit split_edges(const BipartiteGraph& graph, const SplitSpec& spec, int fold);

struct LabeledPair {
  VertexId u;
  VertexId v;
  int label;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

/// Positives as given (label 1) followed by as many distinct non-edges of
/// `graph` (label 0), drawn uniformly and never equal to a pair in `avoid`.
/// Throws InputError when there are not enough non-edges.
std::vector<LabeledPair> build_lp_instances(const BipartiteGraph& graph, std::span<const Edge> positives,
                                            std::uint64_t seed, std::span<const LabeledPair> avoid = {});

/// One row [u_emb[u] | v_emb[v]] per pair.
Matrix lp_features(const EmbeddingSet& emb, std::span<const LabeledPair> pairs);

struct LogisticConfig {
  double l2 = 1e-4;
  double lr = 0.5;
  int epochs = 1000;
  std::uint64_t seed = 0;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double score(std::span<const double> x) const;
};

/// Mean logistic loss plus l2 * |weights|^2; the bias is not penalized.
double logistic_objective(const Matrix& features, std::span<const int> labels, const LogisticModel& model,
                          double l2);
/// Gradient of logistic_objective; writes d/dweights into `grad_weights`
/// and returns d/dbias.
double logistic_gradient(const Matrix& features, std::span<const int> labels, const LogisticModel& model, double l2,
                         std::vector<double>& grad_weights);

/// Full-batch gradient descent from a seeded small random start.
LogisticModel fit_logistic(const Matrix& features, std::span<const int> labels, const LogisticConfig& config);

struct AucResult {
  double roc = 0.0;
  double pr = 0.0;
};

/// ROC area by the rank statistic with ties counted as one half; PR area as
/// average precision over tied score groups. Throws ConfigError unless both
/// classes are present.
AucResult binary_auc(std::span<const double> scores, std::span<const int> labels);

enum class CandidatePolicy {
  ExcludeTrain,  // every item not linked to the user in the train graph
  TestItems,     // items of any test edge, minus the user's train items
};

struct UserMetrics {
  VertexId user;
  double precision;
  double recall;
  double f1;
  double ndcg;
  double ap;
  double rr;
};

struct RankingMetrics {
  std::vector<UserMetrics> users;  // ascending user id
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ndcg = 0.0;
  double map = 0.0;
  double mrr = 0.0;
};

/// Scores candidates by u . v, ranks them descending with ties broken by
/// ascending item id and evaluates the top k for every user with a test
/// edge. AP@k divides by min(|test items|, k); precision divides by k.
RankingMetrics topk_metrics(const EmbeddingSet& emb, const BipartiteGraph& train, std::span<const Edge> test,
                            int k = 10, CandidatePolicy policy = CandidatePolicy::ExcludeTrain);

struct LinkPredictionMetrics {
  AucResult test;
  std::size_t train_instances = 0;
  std::size_t test_instances = 0;
};

/// Fits the classifier on train edges against sampled non-edges and scores
/// test edges against a disjoint set of sampled non-edges.
LinkPredictionMetrics evaluate_link_prediction(const BipartiteGraph& full, const EdgeSplit& split,
                                               const EmbeddingSet& emb, const LogisticConfig& config,
                                               std::uint64_t seed);

enum class Task { LinkPrediction, Recommendation };

std::string to_string(Task task);

struct EvalReport {
  Task task = Task::Recommendation;
  int fold = 0;  // -1 for a mean over folds
  nlohmann::ordered_json config;
  std::map<std::string, double> metrics;

  nlohmann::ordered_json to_json() const;
};

EvalReport make_report(Task task, int fold, const nlohmann::ordered_json& config, const RankingMetrics& metrics,
                       int k);
EvalReport make_report(Task task, int fold, const nlohmann::ordered_json& config,
                       const LinkPredictionMetrics& metrics);

/// Per-metric mean over fold reports of the same task.
EvalReport mean_report(std::span<const EvalReport> folds);

}  // namespace bine
