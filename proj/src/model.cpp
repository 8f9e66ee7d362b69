#include "aga/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aga {

void ModelParams::validate() const {
  if (n < 2) throw std::invalid_argument("ModelParams: n must be >= 2");
  if (m < 0) throw std::invalid_argument("ModelParams: m must be >= 0");
  if (!(q_u > 0.0 && q_u < 1.0))
    throw std::invalid_argument("ModelParams: q_u must lie in (0,1)");
  if (!(q_a > 0.0 && q_a < 1.0))
    throw std::invalid_argument("ModelParams: q_a must lie in (0,1)");
  if (!(rho_u >= 0.0 && rho_u <= 1.0))
    throw std::invalid_argument("ModelParams: rho_u must lie in [0,1]");
  if (!(rho_a >= 0.0 && rho_a <= 1.0))
    throw std::invalid_argument("ModelParams: rho_a must lie in [0,1]");
}

Permutation::Permutation(int n) : images_(static_cast<std::size_t>(n)) {
  if (n < 0) throw std::invalid_argument("Permutation: negative size");
  for (int i = 0; i < n; ++i) images_[static_cast<std::size_t>(i)] = i;
}

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const int n = size();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int image : images_) {
    if (image < 0 || image >= n || seen[static_cast<std::size_t>(image)])
      throw std::invalid_argument("Permutation: images are not a bijection");
    seen[static_cast<std::size_t>(image)] = true;
  }
}

Permutation Permutation::random(int n, Rng& rng) {
  Permutation pi(n);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(pi.images_[static_cast<std::size_t>(i)], pi.images_[static_cast<std::size_t>(j)]);
  }
  return pi;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (int i = 0; i < size(); ++i) inv[static_cast<std::size_t>(images_[static_cast<std::size_t>(i)])] = i;
  return Permutation(std::move(inv));
}

bool Permutation::is_identity() const {
  for (int i = 0; i < size(); ++i)
    if (images_[static_cast<std::size_t>(i)] != i) return false;
  return true;
}

BitMatrix::BitMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64),
      words_(static_cast<std::size_t>(rows) * static_cast<std::size_t>((cols + 63) / 64), 0) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("BitMatrix: negative dimension");
}

int BitMatrix::row_popcount(int r) const {
  int count = 0;
  for (std::uint64_t w : row(r)) count += std::popcount(w);
  return count;
}

int BitMatrix::row_and_popcount(const BitMatrix& a, int ra, const BitMatrix& b, int rb) {
  if (a.cols_ != b.cols_) throw std::invalid_argument("BitMatrix: column mismatch");
  const auto wa = a.row(ra);
  const auto wb = b.row(rb);
  int count = 0;
  for (std::size_t w = 0; w < wa.size(); ++w) count += std::popcount(wa[w] & wb[w]);
  return count;
}

void AttributedGraph::add_user_edge(int i, int j) {
  if (i == j) throw std::invalid_argument("AttributedGraph: self loop");
  user_adj.set(i, j);
  user_adj.set(j, i);
}

std::vector<int> AttributedGraph::user_neighbors(int i) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(user_degree(i)));
  for (int j = 0; j < n; ++j)
    if (user_adj.test(i, j)) out.push_back(j);
  return out;
}

std::pair<bool, bool> sample_correlated_edge(double q, double rho, Rng& rng) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("sample_correlated_edge: q out of (0,1)");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("sample_correlated_edge: rho out of [0,1]");
  const double cov = rho * q * (1.0 - q);
  const double p11 = q * q + cov;
  const double p10 = q * (1.0 - q) - cov;
  const double u = rng.next_unit();
  if (u < p11) return {true, true};
  if (u < p11 + p10) return {true, false};
  if (u < p11 + 2.0 * p10) return {false, true};
  return {false, false};
}

namespace {

AttributedGraphPair generate_with_truth(const ModelParams& params, std::uint64_t seed,
                                        Permutation truth, Rng& rng) {
  AttributedGraphPair pair;
  pair.params = params;
  pair.seed = seed;
  pair.g1 = AttributedGraph(params.n, params.m);
  pair.g2 = AttributedGraph(params.n, params.m);
  pair.truth = std::move(truth);

  for (int i = 0; i < params.n; ++i) {
    for (int j = i + 1; j < params.n; ++j) {
      const auto [in_g1, in_g2] = sample_correlated_edge(params.q_u, params.rho_u, rng);
      if (in_g1) pair.g1.add_user_edge(i, j);
      if (in_g2) pair.g2.add_user_edge(pair.truth(i), pair.truth(j));
    }
  }
  for (int i = 0; i < params.n; ++i) {
    for (int a = 0; a < params.m; ++a) {
      const auto [in_g1, in_g2] = sample_correlated_edge(params.q_a, params.rho_a, rng);
      if (in_g1) pair.g1.add_attr_edge(i, a);
      if (in_g2) pair.g2.add_attr_edge(pair.truth(i), a);
    }
  }
  return pair;
}

}  // namespace

AttributedGraphPair generate_pair(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  Permutation truth = Permutation::random(params.n, rng);
  return generate_with_truth(params, seed, std::move(truth), rng);
}

AttributedGraphPair generate_pair_identity_truth(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  return generate_with_truth(params, seed, Permutation(params.n), rng);
}

ModelParams seeded_mode_params(int total_vertices, double alpha, double p, double s) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("seeded_mode_params: alpha out of (0,1)");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("seeded_mode_params: p out of (0,1)");
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("seeded_mode_params: s out of (0,1]");
  if (!(p * s < 1.0)) throw std::invalid_argument("seeded_mode_params: p*s must be < 1");

  ModelParams params;
  params.m = static_cast<int>(std::floor(static_cast<double>(total_vertices) * alpha));
  params.n = total_vertices - params.m;
  if (params.m == 0) throw std::invalid_argument("seeded_mode_params: no seeds (m == 0)");
  if (params.n < 2) throw std::invalid_argument("seeded_mode_params: fewer than 2 users");
  params.q_u = params.q_a = p * s;
  params.rho_u = params.rho_a = s * (1.0 - p) / (1.0 - p * s);
  params.validate();
  return params;
}

}  // namespace aga
