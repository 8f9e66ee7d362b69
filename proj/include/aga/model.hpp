#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "aga/rng.hpp"

namespace aga {

// Generative parameters of the correlated attributed graph pair model:
// n users, m attributes, user-user edges Bern(q_u) with cross-graph
// correlation rho_u, user-attribute edges Bern(q_a) with correlation rho_a.
// Derived quantities are recomputed on demand so they can never drift out of
// sync with the primaries.
struct ModelParams {
  int n = 0;
  int m = 0;
  double q_u = 0.0;
  double rho_u = 0.0;
  double q_a = 0.0;
  double rho_a = 0.0;

  double sigma2_u() const { return q_u * (1.0 - q_u); }
  double sigma2_a() const { return q_a * (1.0 - q_a); }
  // Subsampling rates: probability that an edge of the implicit base graph
  // survives into one observed graph.
  double s_u() const { return q_u + rho_u * (1.0 - q_u); }
  double s_a() const { return q_a + rho_a * (1.0 - q_a); }

  // Throws std::invalid_argument on out-of-range parameters. Boundary edge
  // probabilities (q == 0 or q == 1 exactly) are rejected, and so are
  // negative correlations.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

// Bijection on {0,...,n-1}.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(int n);                  // identity
  explicit Permutation(std::vector<int> images);  // validates bijectivity

  static Permutation random(int n, Rng& rng);   // unbiased Fisher-Yates

  int size() const { return static_cast<int>(images_.size()); }
  int operator()(int i) const { return images_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& images() const { return images_; }
  Permutation inverse() const;
  bool is_identity() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<int> images_;
};

// Row-major packed bit matrix.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool test(int r, int c) const {
    return (words_[word_index(r, c)] >> (c & 63)) & 1u;
  }
  void set(int r, int c, bool value = true) {
    const std::uint64_t mask = std::uint64_t{1} << (c & 63);
    if (value)
      words_[word_index(r, c)] |= mask;
    else
      words_[word_index(r, c)] &= ~mask;
  }

  std::span<const std::uint64_t> row(int r) const {
    return {words_.data() + static_cast<std::size_t>(r) * words_per_row_,
            static_cast<std::size_t>(words_per_row_)};
  }

  int row_popcount(int r) const;
  // popcount(row(ra) & other.row(rb)); both matrices must share cols.
  static int row_and_popcount(const BitMatrix& a, int ra, const BitMatrix& b, int rb);

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t word_index(int r, int c) const {
    return static_cast<std::size_t>(r) * words_per_row_ + static_cast<std::size_t>(c >> 6);
  }

  int rows_ = 0;
  int cols_ = 0;
  int words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

// One attributed graph: a symmetric user-user adjacency with zero diagonal
// and a user-attribute incidence. Instances are treated as immutable once
// built and are safe to share across concurrent readers.
struct AttributedGraph {
  int n = 0;
  int m = 0;
  BitMatrix user_adj;  // n x n, symmetric, diagonal false
  BitMatrix attr_adj;  // n x m

  AttributedGraph() = default;
  AttributedGraph(int n_, int m_) : n(n_), m(m_), user_adj(n_, n_), attr_adj(n_, m_) {}

  bool user_edge(int i, int j) const { return user_adj.test(i, j); }
  bool attr_edge(int i, int a) const { return attr_adj.test(i, a); }
  void add_user_edge(int i, int j);
  void add_attr_edge(int i, int a) { attr_adj.set(i, a); }

  int user_degree(int i) const { return user_adj.row_popcount(i); }
  int attr_degree(int i) const { return attr_adj.row_popcount(i); }
  std::vector<int> user_neighbors(int i) const;  // ascending

  bool operator==(const AttributedGraph&) const = default;
};

// A correlated pair: g2 is the relabeled graph, truth maps users of g1 to
// their counterparts in g2.
struct AttributedGraphPair {
  AttributedGraph g1;
  AttributedGraph g2;
  Permutation truth;
  ModelParams params;
  std::uint64_t seed = 0;

  bool operator==(const AttributedGraphPair&) const = default;
};

// One draw from the unique joint distribution on {0,1}^2 with Bern(q)
// marginals and correlation rho:
//   P(1,1) = q^2 + rho q(1-q),  P(1,0) = P(0,1) = q(1-q)(1-rho).
// Consumes exactly one uniform variate from the stream.
std::pair<bool, bool> sample_correlated_edge(double q, double rho, Rng& rng);

// Samples a full pair: uniform truth permutation, then one correlated draw
// per unordered user pair (lexicographic order) and per (user, attribute)
// slot. Deterministic given (params, seed).
AttributedGraphPair generate_pair(const ModelParams& params, std::uint64_t seed);

// Diagnostic hook: same edge sampling, but the truth permutation is pinned to
// the identity instead of drawn. Used by the moment estimators and tests.
AttributedGraphPair generate_pair_identity_truth(const ModelParams& params, std::uint64_t seed);

// Parameters of the attributed model that emulate a seeded alignment instance
// with N total vertices, seed fraction alpha, base edge probability p and
// subsampling probability s: the m = floor(N*alpha) attributes act as seeds
// and q_u = q_a = p*s, rho_u = rho_a = s(1-p)/(1-p*s). The emulation drops
// seed-seed edges, which the seeded model would keep.
ModelParams seeded_mode_params(int total_vertices, double alpha, double p, double s);

}  // namespace aga
