#pragma once

#include <limits>

#include <Eigen/Dense>

#include "aga/model.hpp"

namespace aga {

// Per-pair log-likelihood-ratio weights for attribute-only alignment. For a
// candidate pair (i, j) with N11 common attribute neighbors, N10/N01
// one-sided attributes and N00 shared absences,
//   w(i,j) = N11 log(q11/q_a^2) + (N10+N01) log(q10/(q_a(1-q_a)))
//          + N00 log(q00/(1-q_a)^2),
// the log posterior ratio of "(i,j) matched" against "(i,j) independent".
// Maximizing sum_i w(i, pi(i)) over permutations is the MAP rule.
//
// With rho_a == 1 a disagreeing attribute has likelihood zero; such pairs
// get `sentinel` instead of -inf, a finite value large enough in magnitude
// (-(2 n max|finite entry| + 1)) that any permutation using a sentinel entry
// scores below every sentinel-free one.
struct BipartiteWeights {
  Eigen::MatrixXd w;
  double q11 = 0.0;
  double q10 = 0.0;  // == q01
  double q00 = 0.0;
  double sentinel = 0.0;
};

BipartiteWeights pair_weights(const AttributedGraphPair& pair);

// Exact maximum-weight perfect assignment on a square matrix (Hungarian
// shortest-augmenting-path scheme, O(n^3)). Rows are augmented in index
// order and column ties resolve to the lowest index, so the result is
// deterministic. Entries equal to `sentinel` mark forbidden pairs; if no
// sentinel-free perfect matching exists the solve throws.
Permutation max_weight_assignment(const Eigen::MatrixXd& w, double sentinel);

inline Permutation max_weight_assignment(const Eigen::MatrixXd& w) {
  return max_weight_assignment(w, -std::numeric_limits<double>::infinity());
}

// Attribute-only MAP alignment of the pair. Requires m >= 1.
Permutation align_bipartite_map(const AttributedGraphPair& pair);

// m (sqrt(q11 q00) - sqrt(q01 q10))^2 - log n; a positive margin predicts
// exact recovery of the attribute-only MAP rule.
double bipartite_recovery_margin(const ModelParams& params);

}  // namespace aga
