#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aga/model.hpp"

namespace aga {

// Mean-centered adjacency views: off-diagonal user entries are A - q_u (the
// diagonal is pinned to exactly zero, so port sums over u != i need no
// explicit exclusion), attribute entries are A - q_a.
struct NormalizedAdjacency {
  Eigen::MatrixXd user_mat;  // n x n, symmetric, zero diagonal
  Eigen::MatrixXd attr_mat;  // n x m
};

NormalizedAdjacency normalize(const AttributedGraph& graph, const ModelParams& params);

// An attributed tree given by explicit edge lists; it does not have to be a
// subgraph of the input graph, the weight is the product of centered entries.
struct AttributedTree {
  std::vector<std::pair<int, int>> user_edges;  // (user, user)
  std::vector<std::pair<int, int>> attr_edges;  // (user, attribute)
};

double tree_weight(const AttributedTree& tree, const NormalizedAdjacency& norm);

// Per-root table of length-2 path weights: weights(a, u) is the weight of the
// branch root -- u -- attribute a, i.e. user_mat(root, u) * attr_mat(u, a).
// Column `root` is identically zero.
struct PathWeightTable {
  int root = 0;
  Eigen::MatrixXd weights;  // m x n
};

PathWeightTable path_weight_table(const NormalizedAdjacency& norm, int root);

// Weighted count over all trees that connect the root to the distinct
// attributes in `attrs` through distinct port users: the sum over injective
// port assignments of the branch-weight products. Evaluated through the
// set-partition expansion
//   sum over partitions P of attrs:  prod_B (-1)^(|B|-1) (|B|-1)!  *
//                                    prod_B sum_u prod_{a in B} weights(a, u)
// which costs O(Bell(k) k n) instead of the literal O(n^k) enumeration and
// agrees with it exactly.
double tree_count(const PathWeightTable& table, std::span<const int> attrs);

// Literal enumeration of all ordered tuples of distinct port users. Kept as
// the independent oracle for tree_count; guarded to n <= 12, k <= 4.
struct BruteForceCount {
  double value = 0.0;
  std::uint64_t trees = 0;  // number of trees visited, C(n-1,k) k!
};

BruteForceCount tree_count_bruteforce(const NormalizedAdjacency& norm, int root,
                                      std::span<const int> attrs);

// Similarity scores (n x n): entry (i, j) is the inner product over all
// size-k attribute subsets of the two weighted tree counts. Subsets are
// streamed in colexicographic order and each subset's count vectors are
// accumulated as a rank-one update, so memory stays O(n^2 + nm) plus an
// optional cache of per-attribute-pair port sums bounded by
// `cache_budget_bytes` (the cache only changes speed, never the result).
using SimilarityMatrix = Eigen::MatrixXd;

SimilarityMatrix similarity_matrix(const AttributedGraphPair& pair, int k,
                                   std::size_t cache_budget_bytes = std::size_t{64} << 20);

// Acceptance threshold: the fraction c of the expected true-pair score,
//   tau = c * C(m,k) (rho_u sigma_u^2)^k (rho_a sigma_a^2)^k C(n-1,k) k!,
// evaluated in log space.
double threshold_tau(const ModelParams& params, int k, double c);

// Output of the counting alignment: index set `matched` of g1 users with the
// injective mapping into g2, plus the users dropped because their
// above-threshold partners were ambiguous.
struct PartialAlignment {
  std::vector<int> matched;    // sorted
  std::map<int, int> map;      // keys == matched, injective
  std::vector<int> conflicts;  // sorted, disjoint from matched

  void validate(int n) const;  // throws on inconsistency
};

// Matching policy on a score matrix: a pair (i, j) qualifies when its score
// clears tau; i is matched to j only when j is i's unique qualifying partner
// and vice versa. Users of g1 with qualifying partners that fail mutual
// uniqueness are reported in `conflicts`.
PartialAlignment select_mutual_unique(const SimilarityMatrix& scores, double tau);

// Counting alignment end to end: similarity scores, threshold tau, mutual
// uniqueness selection.
PartialAlignment align_by_counting(const AttributedGraphPair& pair, int k, double c);

// JSON round trip for the alignment ({"matched":[...],"map":{...},"conflicts":[...]}).
std::string partial_alignment_to_json(const PartialAlignment& partial);
PartialAlignment partial_alignment_from_json(const std::string& text, int n);

// Set partitions of {0,...,k-1} with their inclusion-exclusion coefficients;
// blocks are bitmasks over the k elements. Shared by tree_count and the
// similarity streaming kernel.
struct SetPartition {
  double coeff = 1.0;                 // prod over blocks of (-1)^(|B|-1) (|B|-1)!
  std::vector<std::uint32_t> blocks;  // disjoint masks covering {0..k-1}
};

const std::vector<SetPartition>& set_partitions(int k);

}  // namespace aga
