#include "bine/mf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "bine/format.hpp"
#include "bine/random.hpp"

namespace bine {

namespace {

void sort_row_major(std::vector<SparseEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

double lookup(std::span<const SparseEntry> entries, std::size_t r, std::size_t c) {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{r, c}, [](const SparseEntry& e, auto key) {
    return e.row != key.first ? e.row < key.first : e.col < key.second;
  });
  return (it != entries.end() && it->row == r && it->col == c) ? it->value : 0.0;
}

Matrix block_rows(const Eigen::MatrixXd& m, std::size_t first, std::size_t count) {
  Matrix out(count, static_cast<std::size_t>(m.cols()));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t k = 0; k < out.cols(); ++k)
      out(i, k) = m(static_cast<Eigen::Index>(first + i), static_cast<Eigen::Index>(k));
  return out;
}

Matrix block_rows(const Matrix& m, std::size_t first, std::size_t count) {
  Matrix out(count, m.cols());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t k = 0; k < m.cols(); ++k) out(i, k) = m(first + i, k);
  return out;
}

Matrix to_matrix(const Eigen::MatrixXd& m) { return block_rows(m, 0, static_cast<std::size_t>(m.rows())); }

EmbeddingSet split_factors(const BlockMatrix& block, const Matrix& a, const Matrix& b) {
  const std::size_t nu = block.u_count();
  const std::size_t nv = block.v_count();
  EmbeddingSet emb;
  emb.dim = a.cols();
  emb.u_emb = block_rows(a, 0, nu);
  emb.v_ctx = block_rows(a, nu, nv);
  emb.v_emb = block_rows(b, 0, nv);
  emb.u_ctx = block_rows(b, nv, nu);
  return emb;
}

}  // namespace

TransitionMatrix::TransitionMatrix(const HomogeneousProjection& projection) {
  const std::size_t n = projection.size();
  offsets_.assign(1, 0);
  degrees_.assign(n, 0.0);
  for (VertexId i = 0; i < n; ++i) {
    const double d = projection.off_diagonal_degree(i);
    degrees_[i] = d;
    volume_ += d;
    for (const Neighbor& nb : projection.neighbors(i)) entries_.push_back({nb.id, nb.weight / d});
    offsets_.push_back(entries_.size());
  }
}

std::span<const Neighbor> TransitionMatrix::row(VertexId i) const {
  return std::span<const Neighbor>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

Eigen::MatrixXd TransitionMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (VertexId i = 0; i < size(); ++i)
    for (const Neighbor& nb : row(i)) p(i, nb.id) = nb.weight;
  return p;
}

Eigen::MatrixXd power_sum(const HomogeneousProjection& projection, int ws, bool allow_isolated) {
  if (ws < 1) throw ConfigError("window size must be >= 1");
  const TransitionMatrix transition(projection);
  if (!allow_isolated)
    for (VertexId i = 0; i < transition.size(); ++i)
      if (!(transition.degree(i) > 0)) throw ConfigError("zero-degree row " + std::to_string(i) + " in power sum");
  const Eigen::MatrixXd p = transition.dense();
  Eigen::MatrixXd power = p;
  Eigen::MatrixXd acc = p;
  for (int r = 2; r <= ws; ++r) {
    power = power * p;
    acc += power;
  }
  return acc / static_cast<double>(ws);
}

ImplicitMatrix::ImplicitMatrix(Side side, std::size_t size, std::vector<SparseEntry> entries)
    : side_(side), size_(size), entries_(std::move(entries)) {
  for (const SparseEntry& e : entries_) {
    if (e.row >= size_ || e.col >= size_) throw ConfigError("implicit matrix entry out of range");
    if (!(e.value > 0) || !std::isfinite(e.value)) throw ConfigError("implicit matrix entries must be finite and > 0");
  }
  sort_row_major(entries_);
}

double ImplicitMatrix::value(VertexId i, VertexId j) const { return lookup(entries_, i, j); }

ImplicitMatrix analytic_implicit_matrix(const HomogeneousProjection& projection, int ws, int ns, const LshIndex& lsh,
                                        std::size_t dense_limit) {
  if (ns < 1) throw ConfigError("ns must be >= 1");
  const std::size_t n = projection.size();
  if (lsh.side() != projection.side() || lsh.size() != n) throw ConfigError("LSH index is for a different side");
  if (n > dense_limit)
    throw ConfigError("side has " + std::to_string(n) + " vertices, above the dense power-sum limit of " +
                      std::to_string(dense_limit) + "; use the corpus-based implicit matrix instead");
  const Eigen::MatrixXd s = power_sum(projection, ws, true);
  std::vector<SparseEntry> entries;
  for (VertexId i = 0; i < n; ++i) {
    for (VertexId j = 0; j < n; ++j) {
      const double mass = s(i, j);
      if (i == j || !(mass > 0)) continue;
      const double m = std::log(mass / (static_cast<double>(ns) * miss_probability(lsh, i, j)));
      if (m > 0) entries.push_back({i, j, m});
    }
  }
  return ImplicitMatrix(projection.side(), n, std::move(entries));
}

ImplicitMatrix empirical_implicit_matrix(const CorpusStats& stats, int ns, const LshIndex& lsh) {
  if (ns < 1) throw ConfigError("ns must be >= 1");
  if (stats.empty()) throw ConfigError("corpus statistics are empty");
  const std::size_t n = stats.vertex_count();
  if (lsh.side() != stats.side() || lsh.size() != n) throw ConfigError("LSH index is for a different side");
  std::vector<SparseEntry> entries;
  for (VertexId i = 0; i < n; ++i) {
    const auto center = static_cast<double>(stats.center_count(i));
    for (const ContextCount& cc : stats.row(i)) {
      if (cc.context == i) continue;
      const double m = std::log(static_cast<double>(cc.count) /
                                (center * static_cast<double>(ns) * miss_probability(lsh, i, cc.context)));
      if (m > 0) entries.push_back({i, cc.context, m});
    }
  }
  return ImplicitMatrix(stats.side(), n, std::move(entries));
}

double sgns_shifted_pmi(const CorpusStats& stats, VertexId w, VertexId c, int ns) {
  const auto pair = static_cast<double>(stats.count(w, c));
  const auto total = static_cast<double>(stats.total());
  const auto cw = static_cast<double>(stats.center_count(w));
  const auto cc = static_cast<double>(stats.context_count(c));
  return std::log(pair * total / (cw * cc)) - std::log(static_cast<double>(ns));
}

BlockMatrix::BlockMatrix(std::size_t u_count, std::size_t v_count, double alpha_prime, double beta_prime,
                         std::vector<SparseEntry> entries)
    : u_count_(u_count),
      v_count_(v_count),
      alpha_prime_(alpha_prime),
      beta_prime_(beta_prime),
      entries_(std::move(entries)) {
  for (const SparseEntry& e : entries_) {
    if (e.row >= rows() || e.col >= cols()) throw ConfigError("block entry out of range");
    if (masked(e.row, e.col)) throw ConfigError("block entry lies in the masked block");
    if (!std::isfinite(e.value)) throw ConfigError("block entries must be finite");
  }
  sort_row_major(entries_);
}

double BlockMatrix::value(std::size_t r, std::size_t c) const { return lookup(entries_, r, c); }

Eigen::MatrixXd BlockMatrix::dense() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (const SparseEntry& e : entries_) h(e.row, e.col) = e.value;
  return h;
}

BlockMatrix assemble_block(const BipartiteGraph& graph, const ImplicitMatrix& m_u, const ImplicitMatrix& m_v,
                           double alpha_prime, double beta_prime) {
  const std::size_t nu = graph.u_count();
  const std::size_t nv = graph.v_count();
  if (m_u.side() != Side::U || m_v.side() != Side::V || m_u.size() != nu || m_v.size() != nv)
    throw ConfigError("implicit matrix dimensions do not match the graph");
  if (!(alpha_prime >= 0 && beta_prime >= 0)) throw ConfigError("block scalings must be nonnegative");

  std::vector<SparseEntry> entries;
  entries.reserve(graph.edge_count() + m_u.nnz() + m_v.nnz());
  for (const Edge& e : graph.edges()) entries.push_back({e.u, e.v, e.weight});
  if (alpha_prime > 0)
    for (const SparseEntry& e : m_u.entries())
      entries.push_back({e.row, static_cast<VertexId>(nv + e.col), alpha_prime * e.value});
  if (beta_prime > 0)
    for (const SparseEntry& e : m_v.entries())
      entries.push_back({static_cast<VertexId>(nu + e.row), e.col, beta_prime * e.value});
  return BlockMatrix(nu, nv, alpha_prime, beta_prime, std::move(entries));
}

void write_block(std::ostream& out, const BlockMatrix& block) {
  out << block.rows() << ' ' << block.cols() << ' ' << block.nnz() << '\n';
  for (const SparseEntry& e : block.entries()) out << e.row << ' ' << e.col << ' ' << format_double(e.value) << '\n';
}

double reconstruction_error(const BlockMatrix& block, const Matrix& a, const Matrix& b) {
  double sse = 0.0;
  for (const SparseEntry& e : block.entries()) {
    const double r = e.value - dot(a.row(e.row), b.row(e.col));
    sse += r * r;
  }
  return sse;
}

double factorization_loss(const BlockMatrix& block, const Matrix& a, const Matrix& b, double reg) {
  double loss = 0.0;
  for (const SparseEntry& e : block.entries()) {
    const double r = e.value - dot(a.row(e.row), b.row(e.col));
    loss += r * r + reg * (dot(a.row(e.row), a.row(e.row)) + dot(b.row(e.col), b.row(e.col)));
  }
  return loss;
}

Factorization factorize(const BlockMatrix& block, const FactorizeConfig& config) {
  const std::size_t d = config.dim;
  if (d < 1 || d > std::min(block.rows(), block.cols()))
    throw ConfigError("factorization rank must lie in [1, min(rows, cols)]");

  Factorization out;
  if (config.mode == FactorizeMode::Svd) {
    const Eigen::MatrixXd h = block.dense();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw DivergenceError("SVD did not converge");
    const auto k = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd left = svd.matrixU().leftCols(k);
    Eigen::MatrixXd right = svd.matrixV().leftCols(k);
    // Fix each component's sign so its largest-magnitude left entry is positive.
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::Index arg = 0;
      left.col(c).cwiseAbs().maxCoeff(&arg);
      if (left(arg, c) < 0) {
        left.col(c) *= -1.0;
        right.col(c) *= -1.0;
      }
    }
    const Eigen::VectorXd root = svd.singularValues().head(k).cwiseSqrt();
    out.a = to_matrix(left * root.asDiagonal());
    out.b = to_matrix(right * root.asDiagonal());
  } else {
    if (!(config.lr > 0) || config.reg < 0 || config.epochs < 0) throw ConfigError("invalid sgd parameters");
    Rng rng(derive_seed(config.seed, 0x736d66ULL));
    const double scale = 0.5 / std::sqrt(static_cast<double>(d));
    out.a = Matrix(block.rows(), d);
    out.b = Matrix(block.cols(), d);
    for (double& x : out.a.data()) x = rng.uniform(-scale, scale);
    for (double& x : out.b.data()) x = rng.uniform(-scale, scale);

    const auto entries = block.entries();
    std::vector<std::size_t> order(entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double> a0(d);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      shuffle(order, rng);
      for (std::size_t idx : order) {
        const SparseEntry& e = entries[idx];
        auto ar = out.a.row(e.row);
        auto bc = out.b.row(e.col);
        const double err = e.value - dot(ar, bc);
        std::copy(ar.begin(), ar.end(), a0.begin());
        for (std::size_t k = 0; k < d; ++k) {
          ar[k] += config.lr * (err * bc[k] - config.reg * a0[k]);
          bc[k] += config.lr * (err * a0[k] - config.reg * bc[k]);
        }
      }
      const double loss = factorization_loss(block, out.a, out.b, config.reg);
      if (!std::isfinite(loss)) throw DivergenceError("matrix factorization diverged");
      out.epoch_loss.push_back(loss);
    }
  }
  out.embeddings = split_factors(block, out.a, out.b);
  return out;
}

}  // namespace bine
