#include "aga/bipartite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace aga {

BipartiteWeights pair_weights(const AttributedGraphPair& pair) {
  const ModelParams& params = pair.params;
  params.validate();
  if (params.m < 1) throw std::invalid_argument("pair_weights: need m >= 1");

  BipartiteWeights weights;
  const double q = params.q_a;
  const double cov = params.rho_a * q * (1.0 - q);
  // Written so that rho_a == 0 reproduces the independent-pair probabilities
  // bit-exactly and every log ratio below is exactly zero.
  weights.q11 = q * q + cov;
  weights.q10 = q * (1.0 - q) * (1.0 - params.rho_a);
  weights.q00 = (1.0 - q) * (1.0 - q) + cov;
  if (weights.q00 <= 0.0 || weights.q10 < 0.0)
    throw std::domain_error("pair_weights: degenerate joint probabilities");

  const double log_match = std::log(weights.q11 / (q * q));
  const double log_mismatch = std::log(weights.q10 / (q * (1.0 - q)));  // -inf at rho_a == 1
  const double log_absent = std::log(weights.q00 / ((1.0 - q) * (1.0 - q)));

  const int n = params.n;
  const int m = params.m;
  std::vector<int> deg1(static_cast<std::size_t>(n));
  std::vector<int> deg2(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    deg1[static_cast<std::size_t>(i)] = pair.g1.attr_degree(i);
    deg2[static_cast<std::size_t>(i)] = pair.g2.attr_degree(i);
  }

  weights.w.resize(n, n);
  double max_abs_finite = 1.0;
  bool any_forbidden = false;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int n11 = BitMatrix::row_and_popcount(pair.g1.attr_adj, i, pair.g2.attr_adj, j);
      const int n10 = deg1[static_cast<std::size_t>(i)] - n11;
      const int n01 = deg2[static_cast<std::size_t>(j)] - n11;
      const int n00 = m - n11 - n10 - n01;
      if (n10 + n01 > 0 && std::isinf(log_mismatch)) {
        weights.w(i, j) = -std::numeric_limits<double>::infinity();
        any_forbidden = true;
        continue;
      }
      // A zero count must contribute exactly zero even when its log ratio is
      // infinite, so each term is gated on its count.
      double value = 0.0;
      if (n11 > 0) value += n11 * log_match;
      if (n10 + n01 > 0) value += (n10 + n01) * log_mismatch;
      if (n00 > 0) value += n00 * log_absent;
      weights.w(i, j) = value;
      max_abs_finite = std::max(max_abs_finite, std::abs(value));
    }
  }

  weights.sentinel = -(2.0 * n * max_abs_finite + 1.0);
  if (any_forbidden)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::isinf(weights.w(i, j))) weights.w(i, j) = weights.sentinel;
  return weights;
}

Permutation max_weight_assignment(const Eigen::MatrixXd& w, double sentinel) {
  const auto n = static_cast<int>(w.rows());
  if (w.cols() != n || n == 0) throw std::invalid_argument("max_weight_assignment: square matrix");
  for (int i = 0; i < n; ++i) {
    bool row_feasible = false;
    bool col_feasible = false;
    for (int j = 0; j < n; ++j) {
      row_feasible = row_feasible || w(i, j) != sentinel;
      col_feasible = col_feasible || w(j, i) != sentinel;
    }
    if (!row_feasible || !col_feasible)
      throw std::runtime_error("max_weight_assignment: no feasible matching");
  }

  // Hungarian algorithm with potentials on cost = -w, 1-indexed with a
  // virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> row_potential(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> col_potential(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> matched_row(static_cast<std::size_t>(n) + 1, 0);  // per column
  std::vector<int> parent_col(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    matched_row[0] = i;
    int j0 = 0;
    std::vector<double> min_reduced(static_cast<std::size_t>(n) + 1, inf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = matched_row[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double reduced = -w(i0 - 1, j - 1) - row_potential[static_cast<std::size_t>(i0)] -
                               col_potential[static_cast<std::size_t>(j)];
        if (reduced < min_reduced[static_cast<std::size_t>(j)]) {
          min_reduced[static_cast<std::size_t>(j)] = reduced;
          parent_col[static_cast<std::size_t>(j)] = j0;
        }
        if (min_reduced[static_cast<std::size_t>(j)] < delta) {
          delta = min_reduced[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      if (j1 == -1 || std::isinf(delta))
        throw std::runtime_error("max_weight_assignment: no feasible matching");
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          row_potential[static_cast<std::size_t>(matched_row[static_cast<std::size_t>(j)])] +=
              delta;
          col_potential[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_reduced[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (matched_row[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = parent_col[static_cast<std::size_t>(j0)];
      matched_row[static_cast<std::size_t>(j0)] = matched_row[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> images(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    images[static_cast<std::size_t>(matched_row[static_cast<std::size_t>(j)] - 1)] = j - 1;
  for (int i = 0; i < n; ++i)
    if (w(i, images[static_cast<std::size_t>(i)]) == sentinel)
      throw std::runtime_error("max_weight_assignment: no feasible matching");
  return Permutation(std::move(images));
}

Permutation align_bipartite_map(const AttributedGraphPair& pair) {
  const BipartiteWeights weights = pair_weights(pair);
  return max_weight_assignment(weights.w, weights.sentinel);
}

double bipartite_recovery_margin(const ModelParams& params) {
  params.validate();
  if (params.m < 1) throw std::invalid_argument("bipartite_recovery_margin: need m >= 1");
  const double q = params.q_a;
  const double cov = params.rho_a * q * (1.0 - q);
  const double q11 = q * q + cov;
  const double q10 = q * (1.0 - q) * (1.0 - params.rho_a);
  const double q00 = (1.0 - q) * (1.0 - q) + cov;
  const double statistic = std::sqrt(q11 * q00) - std::sqrt(q10 * q10);
  return params.m * statistic * statistic - std::log(static_cast<double>(params.n));
}

}  // namespace aga
