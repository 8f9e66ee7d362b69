#include "aga/counting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "aga/analysis.hpp"

namespace aga {

namespace {

void check_attrs(std::span<const int> attrs, int n, int m) {
  const int k = static_cast<int>(attrs.size());
  if (k < 1) throw std::invalid_argument("attribute subset must be non-empty");
  if (k > n - 1)
    throw std::invalid_argument("more branches than available port users (k > n-1)");
  std::set<int> distinct;
  for (int a : attrs) {
    if (a < 0 || a >= m) throw std::out_of_range("attribute index out of range");
    if (!distinct.insert(a).second)
      throw std::invalid_argument("attribute subset has repeated entries");
  }
}

}  // namespace

NormalizedAdjacency normalize(const AttributedGraph& graph, const ModelParams& params) {
  if (graph.n != params.n || graph.m != params.m)
    throw std::invalid_argument("normalize: dimensions do not match params");
  NormalizedAdjacency norm;
  norm.user_mat = Eigen::MatrixXd::Constant(graph.n, graph.n, -params.q_u);
  for (int i = 0; i < graph.n; ++i) {
    for (int j = i + 1; j < graph.n; ++j) {
      if (graph.user_edge(i, j)) {
        norm.user_mat(i, j) = 1.0 - params.q_u;
        norm.user_mat(j, i) = 1.0 - params.q_u;
      }
    }
    norm.user_mat(i, i) = 0.0;
  }
  norm.attr_mat = Eigen::MatrixXd::Constant(graph.n, graph.m, -params.q_a);
  for (int i = 0; i < graph.n; ++i)
    for (int a = 0; a < graph.m; ++a)
      if (graph.attr_edge(i, a)) norm.attr_mat(i, a) = 1.0 - params.q_a;
  return norm;
}

double tree_weight(const AttributedTree& tree, const NormalizedAdjacency& norm) {
  const auto n = norm.user_mat.rows();
  const auto m = norm.attr_mat.cols();
  double weight = 1.0;
  for (const auto& [i, j] : tree.user_edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("tree_weight: user edge");
    weight *= norm.user_mat(i, j);
  }
  for (const auto& [i, a] : tree.attr_edges) {
    if (i < 0 || a < 0 || i >= n || a >= m) throw std::out_of_range("tree_weight: attr edge");
    weight *= norm.attr_mat(i, a);
  }
  return weight;
}

PathWeightTable path_weight_table(const NormalizedAdjacency& norm, int root) {
  const auto n = norm.user_mat.rows();
  if (root < 0 || root >= n) throw std::out_of_range("path_weight_table: root out of range");
  PathWeightTable table;
  table.root = root;
  // weights(a, u) = user_mat(root, u) * attr_mat(u, a); the zero diagonal of
  // user_mat already blanks column `root`.
  table.weights =
      norm.attr_mat.transpose().array().rowwise() * norm.user_mat.row(root).array();
  return table;
}

const std::vector<SetPartition>& set_partitions(int k) {
  if (k < 1 || k > 12) throw std::invalid_argument("set_partitions: k out of [1,12]");
  static std::mutex mutex;
  static std::unordered_map<int, std::vector<SetPartition>> cache;
  std::scoped_lock lock(mutex);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;

  std::vector<SetPartition> partitions;
  std::vector<int> assignment(static_cast<std::size_t>(k), 0);
  // Restricted growth strings: assignment[i] <= max(assignment[0..i-1]) + 1.
  auto emit = [&] {
    SetPartition partition;
    const int num_blocks = 1 + *std::max_element(assignment.begin(), assignment.end());
    partition.blocks.assign(static_cast<std::size_t>(num_blocks), 0);
    for (int i = 0; i < k; ++i)
      partition.blocks[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])] |=
          std::uint32_t{1} << i;
    for (std::uint32_t block : partition.blocks) {
      const int size = std::popcount(block);
      double factorial = 1.0;
      for (int t = 2; t < size; ++t) factorial *= t;
      partition.coeff *= (size % 2 == 1 ? 1.0 : -1.0) * factorial;
    }
    partitions.push_back(std::move(partition));
  };
  // Depth-first over positions 1..k-1 (position 0 is always block 0).
  auto recurse = [&](auto&& self, int pos, int max_used) -> void {
    if (pos == k) {
      emit();
      return;
    }
    for (int b = 0; b <= max_used + 1; ++b) {
      assignment[static_cast<std::size_t>(pos)] = b;
      self(self, pos + 1, std::max(max_used, b));
    }
  };
  recurse(recurse, 1, 0);
  return cache.emplace(k, std::move(partitions)).first->second;
}

double tree_count(const PathWeightTable& table, std::span<const int> attrs) {
  const int n = static_cast<int>(table.weights.cols());
  const int m = static_cast<int>(table.weights.rows());
  check_attrs(attrs, n, m);
  const int k = static_cast<int>(attrs.size());

  // Port sums for every non-empty sub-block of attrs, built up by low bit:
  // products(mask) = elementwise product over a in mask of weights.row(a).
  const std::uint32_t full = (std::uint32_t{1} << k) - 1;
  std::vector<Eigen::RowVectorXd> products(full + 1);
  std::vector<double> block_sum(full + 1, 0.0);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int low = std::countr_zero(mask);
    const auto row = table.weights.row(attrs[static_cast<std::size_t>(low)]);
    const std::uint32_t rest = mask & (mask - 1);
    if (rest == 0)
      products[mask] = row;
    else
      products[mask] = products[rest].cwiseProduct(row);
    block_sum[mask] = products[mask].sum();
  }

  double total = 0.0;
  for (const SetPartition& partition : set_partitions(k)) {
    double term = partition.coeff;
    for (std::uint32_t block : partition.blocks) term *= block_sum[block];
    total += term;
  }
  return total;
}

BruteForceCount tree_count_bruteforce(const NormalizedAdjacency& norm, int root,
                                      std::span<const int> attrs) {
  const int n = static_cast<int>(norm.user_mat.rows());
  const int m = static_cast<int>(norm.attr_mat.cols());
  const int k = static_cast<int>(attrs.size());
  if (n > 12 || k > 4)
    throw std::invalid_argument("tree_count_bruteforce: guardrail n <= 12, k <= 4");
  if (root < 0 || root >= n) throw std::out_of_range("tree_count_bruteforce: root");
  check_attrs(attrs, n, m);

  BruteForceCount result;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  used[static_cast<std::size_t>(root)] = true;
  auto recurse = [&](auto&& self, int branch, double weight) -> void {
    if (branch == k) {
      result.value += weight;
      ++result.trees;
      return;
    }
    const int attr = attrs[static_cast<std::size_t>(branch)];
    for (int port = 0; port < n; ++port) {
      if (used[static_cast<std::size_t>(port)]) continue;
      used[static_cast<std::size_t>(port)] = true;
      self(self, branch + 1,
           weight * norm.user_mat(root, port) * norm.attr_mat(port, attr));
      used[static_cast<std::size_t>(port)] = false;
    }
  };
  recurse(recurse, 0, 1.0);
  return result;
}

namespace {

// Streaming state for one graph: centered matrices, their elementwise powers
// (a block of b coinciding branches contributes user_mat^b), and the
// precomputed single-attribute port sums user_mat * attr_mat.
struct CountingContext {
  explicit CountingContext(NormalizedAdjacency norm, int k, std::size_t cache_budget)
      : attr(std::move(norm.attr_mat)), budget(cache_budget) {
    user_pows.reserve(static_cast<std::size_t>(k));
    user_pows.push_back(std::move(norm.user_mat));
    for (int p = 2; p <= k; ++p) {
      Eigen::MatrixXd next = user_pows.back().cwiseProduct(user_pows.front());
      user_pows.push_back(std::move(next));
    }
    singles.noalias() = user_pows.front() * attr;
  }

  // Port-sum vector for one block: sum_u user_mat(i,u)^|B| prod_{a in B} attr_mat(u,a).
  Eigen::VectorXd block_vector(std::span<const int> attrs, std::uint32_t mask,
                               const Eigen::VectorXd& column_product) {
    const int size = std::popcount(mask);
    if (size == 1) return singles.col(attrs[static_cast<std::size_t>(std::countr_zero(mask))]);
    if (size == 2) {
      const int a = attrs[static_cast<std::size_t>(std::countr_zero(mask))];
      const int b = attrs[static_cast<std::size_t>(31 - std::countl_zero(mask))];
      const std::int64_t key = static_cast<std::int64_t>(a) * attr.cols() + b;
      if (auto it = pair_cache.find(key); it != pair_cache.end()) return it->second;
      Eigen::VectorXd vec = user_pows[1] * column_product;
      const std::size_t bytes = sizeof(double) * static_cast<std::size_t>(vec.size());
      if (cache_bytes + bytes <= budget) {
        cache_bytes += bytes;
        pair_cache.emplace(key, vec);
      }
      return vec;
    }
    return user_pows[static_cast<std::size_t>(size - 1)] * column_product;
  }

  Eigen::MatrixXd attr;
  std::vector<Eigen::MatrixXd> user_pows;
  Eigen::MatrixXd singles;
  std::unordered_map<std::int64_t, Eigen::VectorXd> pair_cache;
  std::size_t budget;
  std::size_t cache_bytes = 0;
};

// Count vector over all roots for one attribute subset, via the same
// set-partition expansion as tree_count but vectorized over roots.
Eigen::VectorXd count_vector(CountingContext& ctx, std::span<const int> attrs) {
  const int k = static_cast<int>(attrs.size());
  const auto n = ctx.user_pows[0].rows();
  const std::uint32_t full = (std::uint32_t{1} << k) - 1;

  std::vector<Eigen::VectorXd> column_products(full + 1);
  std::vector<Eigen::VectorXd> block_vectors(full + 1);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int low = std::countr_zero(mask);
    const auto column = ctx.attr.col(attrs[static_cast<std::size_t>(low)]);
    const std::uint32_t rest = mask & (mask - 1);
    if (rest == 0)
      column_products[mask] = column;
    else
      column_products[mask] = column_products[rest].cwiseProduct(column);
    block_vectors[mask] = ctx.block_vector(attrs, mask, column_products[mask]);
  }

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd term(n);
  for (const SetPartition& partition : set_partitions(k)) {
    term.setConstant(partition.coeff);
    for (std::uint32_t block : partition.blocks) term = term.cwiseProduct(block_vectors[block]);
    counts += term;
  }
  return counts;
}

// Advances a k-combination of {0..m-1} in colexicographic order; returns
// false after the last one.
bool next_colex(std::vector<int>& combo, int m) {
  const int k = static_cast<int>(combo.size());
  for (int t = 0; t < k; ++t) {
    const int limit = (t + 1 < k) ? combo[static_cast<std::size_t>(t) + 1] : m;
    if (combo[static_cast<std::size_t>(t)] + 1 < limit) {
      ++combo[static_cast<std::size_t>(t)];
      for (int s = 0; s < t; ++s) combo[static_cast<std::size_t>(s)] = s;
      return true;
    }
  }
  return false;
}

}  // namespace

SimilarityMatrix similarity_matrix(const AttributedGraphPair& pair, int k,
                                   std::size_t cache_budget_bytes) {
  const ModelParams& params = pair.params;
  if (k < 1 || k > std::min(params.m, params.n - 1))
    throw std::invalid_argument("similarity_matrix: k out of [1, min(m, n-1)]");

  // Pair-level caching only pays off for k >= 3; at k = 2 each attribute
  // pair is visited exactly once.
  const std::size_t per_graph_budget = k >= 3 ? cache_budget_bytes / 2 : 0;
  CountingContext ctx1(normalize(pair.g1, params), k, per_graph_budget);
  CountingContext ctx2(normalize(pair.g2, params), k, per_graph_budget);

  SimilarityMatrix scores = SimilarityMatrix::Zero(params.n, params.n);
  std::vector<int> combo(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) combo[static_cast<std::size_t>(t)] = t;
  do {
    const Eigen::VectorXd counts1 = count_vector(ctx1, combo);
    const Eigen::VectorXd counts2 = count_vector(ctx2, combo);
    scores.noalias() += counts1 * counts2.transpose();
  } while (next_colex(combo, params.m));
  return scores;
}

double threshold_tau(const ModelParams& params, int k, double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("threshold_tau: c out of (0,1)");
  return c * expected_similarity(params, k);
}

void PartialAlignment::validate(int n) const {
  if (!std::is_sorted(matched.begin(), matched.end()) ||
      std::adjacent_find(matched.begin(), matched.end()) != matched.end())
    throw std::invalid_argument("PartialAlignment: matched must be sorted and unique");
  if (matched.size() != map.size())
    throw std::invalid_argument("PartialAlignment: matched and map domains differ");
  std::set<int> images;
  for (int i : matched) {
    auto it = map.find(i);
    if (it == map.end()) throw std::invalid_argument("PartialAlignment: matched user not in map");
    if (i < 0 || i >= n || it->second < 0 || it->second >= n)
      throw std::out_of_range("PartialAlignment: index out of range");
    if (!images.insert(it->second).second)
      throw std::invalid_argument("PartialAlignment: map is not injective");
  }
  for (int i : conflicts) {
    if (i < 0 || i >= n) throw std::out_of_range("PartialAlignment: conflict out of range");
    if (map.count(i)) throw std::invalid_argument("PartialAlignment: conflict overlaps matched");
  }
}

PartialAlignment select_mutual_unique(const SimilarityMatrix& scores, double tau) {
  const int n = static_cast<int>(scores.rows());
  if (scores.cols() != n) throw std::invalid_argument("select_mutual_unique: square matrix");

  // Qualifying partners per side.
  std::vector<std::vector<int>> partners_of_i(static_cast<std::size_t>(n));
  std::vector<int> qualifier_count_of_j(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (scores(i, j) >= tau) {
        partners_of_i[static_cast<std::size_t>(i)].push_back(j);
        ++qualifier_count_of_j[static_cast<std::size_t>(j)];
      }

  PartialAlignment out;
  for (int i = 0; i < n; ++i) {
    const auto& partners = partners_of_i[static_cast<std::size_t>(i)];
    if (partners.empty()) continue;
    if (partners.size() == 1 && qualifier_count_of_j[static_cast<std::size_t>(partners[0])] == 1) {
      out.matched.push_back(i);
      out.map.emplace(i, partners[0]);
    } else {
      out.conflicts.push_back(i);
    }
  }
  out.validate(n);
  return out;
}

PartialAlignment align_by_counting(const AttributedGraphPair& pair, int k, double c) {
  return select_mutual_unique(similarity_matrix(pair, k), threshold_tau(pair.params, k, c));
}

std::string partial_alignment_to_json(const PartialAlignment& partial) {
  nlohmann::ordered_json j;
  j["matched"] = partial.matched;
  auto& map = j["map"] = nlohmann::ordered_json::object();
  for (const auto& [i, target] : partial.map) map[std::to_string(i)] = std::to_string(target);
  j["conflicts"] = partial.conflicts;
  return j.dump();
}

PartialAlignment partial_alignment_from_json(const std::string& text, int n) {
  const auto j = nlohmann::json::parse(text);
  PartialAlignment partial;
  partial.matched = j.at("matched").get<std::vector<int>>();
  for (const auto& [key, value] : j.at("map").items())
    partial.map.emplace(std::stoi(key), std::stoi(value.get<std::string>()));
  partial.conflicts = j.at("conflicts").get<std::vector<int>>();
  partial.validate(n);
  return partial;
}

}  // namespace aga
