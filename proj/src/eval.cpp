#include "bine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "bine/random.hpp"

namespace bine {

namespace {

std::uint64_t pair_key(VertexId u, VertexId v, std::size_t v_count) {
  return static_cast<std::uint64_t>(u) * v_count + v;
}

double logit(const LogisticModel& model, std::span<const double> x) { return dot(model.weights, x) + model.bias; }

void check_labels(std::span<const int> labels, std::size_t rows) {
  if (labels.size() != rows) throw ConfigError("label count does not match feature rows");
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ConfigError("labels must be 0 or 1");
    (y == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw ConfigError("both classes must be present");
}

}  // namespace

void SplitSpec::validate() const {
  if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train fraction must lie in (0, 1)");
  if (folds < 1) throw ConfigError("folds must be >= 1");
}

EdgeSplit split_edges(const BipartiteGraph& graph, const SplitSpec& spec, int fold) {
  spec.validate();
  if (fold < 0 || fold >= spec.folds) throw ConfigError("fold index out of range");
  const auto edges = graph.edges();
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, 0x73706c74ULL, static_cast<std::uint64_t>(fold)));
  shuffle(order, rng);

  const auto n_train =
      static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(edges.size()) + 1e-9));
  std::vector<char> in_train(edges.size(), 0);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;

  std::vector<Edge> train;
  EdgeSplit out;
  for (std::size_t i = 0; i < edges.size(); ++i) (in_train[i] ? train : out.test).push_back(edges[i]);
  out.train = BipartiteGraph(graph.u_count(), graph.v_count(), std::move(train), graph.tokens(Side::U),
                             graph.tokens(Side::V));
  return out;
}

std::vector<LabeledPair> build_lp_instances(const BipartiteGraph& graph, std::span<const Edge> positives,
                                            std::uint64_t seed, std::span<const LabeledPair> avoid) {
  const std::size_t nv = graph.v_count();
  const std::uint64_t cells = static_cast<std::uint64_t>(graph.u_count()) * nv;
  std::unordered_set<std::uint64_t> blocked;
  for (const Edge& e : graph.edges()) blocked.insert(pair_key(e.u, e.v, nv));
  for (const LabeledPair& p : avoid)
    if (p.u < graph.u_count() && p.v < nv && !graph.weight(p.u, p.v)) blocked.insert(pair_key(p.u, p.v, nv));

  const std::size_t need = positives.size();
  const std::uint64_t available = cells - blocked.size();
  if (need > available)
    throw InputError("not enough unconnected pairs: need " + std::to_string(need) + ", have " +
                     std::to_string(available));

  std::vector<LabeledPair> out;
  out.reserve(2 * need);
  for (const Edge& e : positives) out.push_back({e.u, e.v, 1});

  Rng rng(derive_seed(seed, 0x6e656773ULL));
  if (need * 2 <= available) {
    std::unordered_set<std::uint64_t> taken;
    while (out.size() < 2 * need) {
      const std::uint64_t key = rng.index(cells);
      if (blocked.count(key) || !taken.insert(key).second) continue;
      out.push_back({static_cast<VertexId>(key / nv), static_cast<VertexId>(key % nv), 0});
    }
  } else {
    std::vector<std::uint64_t> pool;
    pool.reserve(available);
    for (std::uint64_t key = 0; key < cells; ++key)
      if (!blocked.count(key)) pool.push_back(key);
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t j = i + rng.index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.push_back({static_cast<VertexId>(pool[i] / nv), static_cast<VertexId>(pool[i] % nv), 0});
    }
  }
  return out;
}

Matrix lp_features(const EmbeddingSet& emb, std::span<const LabeledPair> pairs) {
  const std::size_t d = emb.dim;
  Matrix x(pairs.size(), 2 * d);
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    auto row = x.row(n);
    const auto u = emb.u_emb.row(pairs[n].u);
    const auto v = emb.v_emb.row(pairs[n].v);
    std::copy(u.begin(), u.end(), row.begin());
    std::copy(v.begin(), v.end(), row.begin() + static_cast<std::ptrdiff_t>(d));
  }
  return x;
}

double LogisticModel::score(std::span<const double> x) const { return sigmoid(logit(*this, x)); }

double logistic_objective(const Matrix& features, std::span<const int> labels, const LogisticModel& model,
                          double l2) {
  double loss = 0.0;
  for (std::size_t n = 0; n < features.rows(); ++n) {
    const double z = logit(model, features.row(n));
    loss -= labels[n] == 1 ? log_sigmoid(z) : log_sigmoid(-z);
  }
  return loss / static_cast<double>(features.rows()) + l2 * dot(model.weights, model.weights);
}

double logistic_gradient(const Matrix& features, std::span<const int> labels, const LogisticModel& model, double l2,
                         std::vector<double>& grad_weights) {
  const auto n_rows = static_cast<double>(features.rows());
  grad_weights.assign(model.weights.size(), 0.0);
  double grad_bias = 0.0;
  for (std::size_t n = 0; n < features.rows(); ++n) {
    const double r = (sigmoid(logit(model, features.row(n))) - labels[n]) / n_rows;
    axpy(r, features.row(n), grad_weights);
    grad_bias += r;
  }
  axpy(2.0 * l2, model.weights, grad_weights);
  return grad_bias;
}

LogisticModel fit_logistic(const Matrix& features, std::span<const int> labels, const LogisticConfig& config) {
  check_labels(labels, features.rows());
  if (!features.all_finite()) throw ConfigError("features must be finite");
  if (!(config.l2 >= 0) || !(config.lr > 0) || config.epochs < 0) throw ConfigError("invalid logistic parameters");

  LogisticModel model;
  model.weights.resize(features.cols());
  Rng rng(derive_seed(config.seed, 0x6c6f6769ULL));
  for (double& w : model.weights) w = rng.uniform(-0.01, 0.01);

  std::vector<double> grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double grad_bias = logistic_gradient(features, labels, model, config.l2, grad);
    axpy(-config.lr, grad, model.weights);
    model.bias -= config.lr * grad_bias;
    if (!std::isfinite(model.bias) ||
        !std::all_of(model.weights.begin(), model.weights.end(), [](double w) { return std::isfinite(w); }))
      throw DivergenceError("logistic regression diverged");
  }
  return model;
}

AucResult binary_auc(std::span<const double> scores, std::span<const int> labels) {
  check_labels(labels, scores.size());
  for (double s : scores)
    if (!std::isfinite(s)) throw ConfigError("scores must be finite");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::uint64_t total_pos = 0;
  for (int y : labels) total_pos += static_cast<std::uint64_t>(y);
  const std::uint64_t total_neg = labels.size() - total_pos;

  std::uint64_t tp = 0, fp = 0, twice_ordered = 0;
  double precision_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::uint64_t gp = 0, gn = 0;
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) (labels[order[j]] == 1 ? gp : gn) += 1;
    twice_ordered += gp * (2 * (total_neg - fp - gn) + gn);
    tp += gp;
    fp += gn;
    if (gp > 0) precision_sum += static_cast<double>(gp) * (static_cast<double>(tp) / static_cast<double>(tp + fp));
    i = j;
  }
  AucResult out;
  out.roc = static_cast<double>(twice_ordered) / (2.0 * static_cast<double>(total_pos) * static_cast<double>(total_neg));
  out.pr = precision_sum / static_cast<double>(total_pos);
  return out;
}

RankingMetrics topk_metrics(const EmbeddingSet& emb, const BipartiteGraph& train, std::span<const Edge> test, int k,
                            CandidatePolicy policy) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const std::size_t nu = train.u_count();
  const std::size_t nv = train.v_count();
  if (emb.u_emb.rows() != nu || emb.v_emb.rows() != nv) throw ConfigError("embedding shape does not match the graph");

  std::vector<std::vector<VertexId>> relevant(nu);
  std::vector<char> test_item(nv, 0);
  for (const Edge& e : test) {
    if (e.u >= nu || e.v >= nv) throw ConfigError("test edge out of range");
    relevant[e.u].push_back(e.v);
    test_item[e.v] = 1;
  }

  RankingMetrics out;
  std::vector<char> is_train(nv, 0);
  std::vector<char> is_relevant(nv, 0);
  std::vector<std::pair<double, VertexId>> ranked;
  for (VertexId u = 0; u < nu; ++u) {
    auto& rel = relevant[u];
    if (rel.empty()) continue;
    std::sort(rel.begin(), rel.end());
    rel.erase(std::unique(rel.begin(), rel.end()), rel.end());

    for (const Neighbor& nb : train.neighbors(Side::U, u)) is_train[nb.id] = 1;
    for (VertexId v : rel) is_relevant[v] = 1;
    ranked.clear();
    for (VertexId v = 0; v < nv; ++v) {
      if (is_train[v] || (policy == CandidatePolicy::TestItems && !test_item[v])) continue;
      ranked.emplace_back(dot(emb.u_emb.row(u), emb.v_emb.row(v)), v);
    }
    if (ranked.empty()) throw ConfigError("user " + std::to_string(u) + " has no candidate items");
    const auto cut = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(cut), ranked.end(),
                      [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });

    std::size_t hits = 0;
    double dcg = 0.0, ap = 0.0, rr = 0.0;
    for (std::size_t pos = 1; pos <= cut; ++pos) {
      if (!is_relevant[ranked[pos - 1].second]) continue;
      ++hits;
      dcg += 1.0 / std::log2(static_cast<double>(pos) + 1.0);
      ap += static_cast<double>(hits) / static_cast<double>(pos);
      if (rr == 0.0) rr = 1.0 / static_cast<double>(pos);
    }
    const std::size_t ideal = std::min<std::size_t>(rel.size(), static_cast<std::size_t>(k));
    double idcg = 0.0;
    for (std::size_t pos = 1; pos <= ideal; ++pos) idcg += 1.0 / std::log2(static_cast<double>(pos) + 1.0);

    UserMetrics m{u, 0, 0, 0, 0, 0, rr};
    m.precision = static_cast<double>(hits) / static_cast<double>(k);
    m.recall = static_cast<double>(hits) / static_cast<double>(rel.size());
    m.f1 = hits == 0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.ndcg = dcg / idcg;
    m.ap = ap / static_cast<double>(ideal);
    out.users.push_back(m);

    for (const Neighbor& nb : train.neighbors(Side::U, u)) is_train[nb.id] = 0;
    for (VertexId v : rel) is_relevant[v] = 0;
  }
  if (out.users.empty()) throw ConfigError("no user has a test edge");

  for (const UserMetrics& m : out.users) {
    out.precision += m.precision;
    out.recall += m.recall;
    out.f1 += m.f1;
    out.ndcg += m.ndcg;
    out.map += m.ap;
    out.mrr += m.rr;
  }
  const auto n = static_cast<double>(out.users.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  out.ndcg /= n;
  out.map /= n;
  out.mrr /= n;
  return out;
}

LinkPredictionMetrics evaluate_link_prediction(const BipartiteGraph& full, const EdgeSplit& split,
                                               const EmbeddingSet& emb, const LogisticConfig& config,
                                               std::uint64_t seed) {
  const auto test_pairs = build_lp_instances(full, split.test, derive_seed(seed, 0x6c70ULL, 1));
  const auto train_pairs = build_lp_instances(full, split.train.edges(), derive_seed(seed, 0x6c70ULL, 2), test_pairs);

  std::vector<int> train_labels, test_labels;
  for (const LabeledPair& p : train_pairs) train_labels.push_back(p.label);
  for (const LabeledPair& p : test_pairs) test_labels.push_back(p.label);

  const LogisticModel model = fit_logistic(lp_features(emb, train_pairs), train_labels, config);
  const Matrix test_x = lp_features(emb, test_pairs);
  std::vector<double> scores(test_pairs.size());
  for (std::size_t n = 0; n < test_pairs.size(); ++n) scores[n] = model.score(test_x.row(n));

  LinkPredictionMetrics out;
  out.test = binary_auc(scores, test_labels);
  out.train_instances = train_pairs.size();
  out.test_instances = test_pairs.size();
  return out;
}

std::string to_string(Task task) { return task == Task::LinkPrediction ? "link_prediction" : "recommendation"; }

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = to_string(task);
  if (fold >= 0)
    j["fold"] = fold;
  else
    j["fold"] = "mean";
  j["config"] = config;
  j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : metrics) j["metrics"][name] = value;
  return j;
}

EvalReport make_report(Task task, int fold, const nlohmann::ordered_json& config, const RankingMetrics& metrics,
                       int k) {
  const std::string at = "@" + std::to_string(k);
  EvalReport r{task, fold, config, {}};
  r.metrics["precision" + at] = metrics.precision;
  r.metrics["recall" + at] = metrics.recall;
  r.metrics["f1" + at] = metrics.f1;
  r.metrics["ndcg" + at] = metrics.ndcg;
  r.metrics["map" + at] = metrics.map;
  r.metrics["mrr" + at] = metrics.mrr;
  return r;
}

EvalReport make_report(Task task, int fold, const nlohmann::ordered_json& config,
                       const LinkPredictionMetrics& metrics) {
  EvalReport r{task, fold, config, {}};
  r.metrics["auc_roc"] = metrics.test.roc;
  r.metrics["auc_pr"] = metrics.test.pr;
  return r;
}

EvalReport mean_report(std::span<const EvalReport> folds) {
  if (folds.empty()) throw ConfigError("no fold reports to average");
  EvalReport out{folds.front().task, -1, folds.front().config, {}};
  for (const auto& [name, value] : folds.front().metrics) {
    double sum = 0.0;
    for (const EvalReport& r : folds) {
      const auto it = r.metrics.find(name);
      if (r.task != out.task || it == r.metrics.end()) throw ConfigError("fold reports do not match");
      sum += it->second;
    }
    out.metrics[name] = sum / static_cast<double>(folds.size());
  }
  return out;
}

}  // namespace bine
