#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bine/graph.hpp"
#include "bine/negatives.hpp"
#include "bine/trainer.hpp"
#include "bine/walks.hpp"

namespace bine {

/// P = D^-1 W over a projection's off-diagonal entries, the kernel the
/// random walks follow.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(const HomogeneousProjection& projection);

  std::size_t size() const { return degrees_.size(); }
  std::span<const Neighbor> row(VertexId i) const;
  double degree(VertexId i) const { return degrees_[i]; }
  double volume() const { return volume_; }
  /// Stationary probability d_i / vol.
  double stationary(VertexId i) const { return degrees_[i] / volume_; }

  Eigen::MatrixXd dense() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> entries_;
  std::vector<double> degrees_;
  double volume_ = 0.0;
};

inline constexpr std::size_t kDensePowerSumLimit = 5000;

/// (1/ws) * sum_{r=1..ws} P^r. Throws ConfigError on a zero-degree row
/// unless `allow_isolated`, in which case such rows stay zero.
Eigen::MatrixXd power_sum(const HomogeneousProjection& projection, int ws, bool allow_isolated = false);

struct SparseEntry {
  VertexId row;
  VertexId col;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Clipped implicit matrix M' = max(M, 0); only positive entries are stored,
/// in row-major order. Diagonal pairs are never stored.
class ImplicitMatrix {
 public:
  ImplicitMatrix(Side side, std::size_t size, std::vector<SparseEntry> entries);

  Side side() const { return side_; }
  std::size_t size() const { return size_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const SparseEntry> entries() const { return entries_; }
  /// Zero when absent.
  double value(VertexId i, VertexId j) const;

 private:
  Side side_;
  std::size_t size_;
  std::vector<SparseEntry> entries_;
};

/// M_ij = log( S_ij / (ns * q(i, j)) ) with S the power sum: the closed form
/// reached as the corpus grows. Refuses sides larger than `dense_limit`.
ImplicitMatrix analytic_implicit_matrix(const HomogeneousProjection& projection, int ws, int ns,
                                        const LshIndex& lsh, std::size_t dense_limit = kDensePowerSumLimit);

/// M_ij = log( #(i,j) / (#(i) * ns * q(i, j)) ) from corpus counts.
ImplicitMatrix empirical_implicit_matrix(const CorpusStats& stats, int ns, const LshIndex& lsh);

/// log( #(w,c) |D| / (#(w) #(c)) ) - log ns, the shifted PMI that
/// frequency-based negative sampling factorizes. Diagnostic only.
double sgns_shifted_pmi(const CorpusStats& stats, VertexId w, VertexId c, int ns);

/// H = [[W, a' M'U], [b' M'V, O]] of shape (|U|+|V|) x (|V|+|U|). The O
/// block is masked; entries of it are never stored.
class BlockMatrix {
 public:
  BlockMatrix(std::size_t u_count, std::size_t v_count, double alpha_prime, double beta_prime,
              std::vector<SparseEntry> entries);

  std::size_t rows() const { return u_count_ + v_count_; }
  std::size_t cols() const { return v_count_ + u_count_; }
  std::size_t u_count() const { return u_count_; }
  std::size_t v_count() const { return v_count_; }
  double alpha_prime() const { return alpha_prime_; }
  double beta_prime() const { return beta_prime_; }

  bool masked(std::size_t r, std::size_t c) const { return r >= u_count_ && c >= v_count_; }
  std::span<const SparseEntry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  double value(std::size_t r, std::size_t c) const;

  /// Masked entries read as zero.
  Eigen::MatrixXd dense() const;

 private:
  std::size_t u_count_;
  std::size_t v_count_;
  double alpha_prime_;
  double beta_prime_;
  std::vector<SparseEntry> entries_;
};

BlockMatrix assemble_block(const BipartiteGraph& graph, const ImplicitMatrix& m_u, const ImplicitMatrix& m_v,
                           double alpha_prime, double beta_prime);

/// "rows cols nnz" header, then "row col value" per stored entry.
void write_block(std::ostream& out, const BlockMatrix& block);

enum class FactorizeMode { Svd, Sgd };

struct FactorizeConfig {
  FactorizeMode mode = FactorizeMode::Svd;
  std::size_t dim = 128;
  double lr = 0.005;
  double reg = 0.01;
  int epochs = 100;
  std::uint64_t seed = 0;
};

struct Factorization {
  EmbeddingSet embeddings;
  Matrix a;  // (|U|+|V|) x d
  Matrix b;  // (|V|+|U|) x d, so H ~ a * b^T
  std::vector<double> epoch_loss;  // sgd only
};

/// svd: rank-d truncated SVD of H with masked entries as zeros, A = U sqrt(S),
/// B = V sqrt(S). sgd: squared error plus L2 over stored entries only.
/// Row blocks of A give u_emb and v_ctx; row blocks of B give v_emb and
/// u_ctx.
Factorization factorize(const BlockMatrix& block, const FactorizeConfig& config);

/// Sum over stored entries of (H - a.b)^2 + reg (|a|^2 + |b|^2).
double factorization_loss(const BlockMatrix& block, const Matrix& a, const Matrix& b, double reg);

/// Sum of squared residuals over stored entries.
double reconstruction_error(const BlockMatrix& block, const Matrix& a, const Matrix& b);

}  // namespace bine
