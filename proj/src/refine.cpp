#include "aga/refine.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace aga {

double f_eval(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("f_eval: x must be > 0");
  return x * std::log(x) - x + 1.0;
}

double solve_f_upper(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("solve_f_upper: y must be > 0");
  const double tol = 0.5e-12 * std::max(1.0, y);

  // f(1+d) ~ d^2/2 near the minimum, f(x) ~ x log x for large x.
  double lo = 1.0;
  double hi = std::max(2.0, 1.0 + 2.0 * std::sqrt(2.0 * y));
  while (f_eval(hi) < y) hi *= 2.0;
  double x = std::min(hi, 1.0 + std::sqrt(2.0 * y));

  for (int iter = 0; iter < 200; ++iter) {
    const double fx = f_eval(x) - y;
    if (std::abs(fx) <= tol) break;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    const double derivative = std::log(x);
    double next = derivative > 1e-18 ? x - fx / derivative : 0.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

RefineThresholds compute_refine_thresholds(const ModelParams& params) {
  params.validate();
  RefineThresholds thresholds;
  const double log_n = std::log(static_cast<double>(params.n));
  const double user_base = (params.n - 2) * params.q_u * params.q_u;
  const double attr_base = params.m * params.q_a * params.q_a;
  thresholds.gamma1 = user_base > 0.0 ? solve_f_upper(3.0 * log_n / user_base)
                                      : std::numeric_limits<double>::infinity();
  thresholds.gamma2 = thresholds.gamma1;
  thresholds.gamma3 = attr_base > 0.0 ? solve_f_upper(3.0 * log_n / attr_base)
                                      : std::numeric_limits<double>::infinity();
  return thresholds;
}

Regime select_regime(const ModelParams& params) {
  params.validate();
  const double attr_information = params.m * params.q_a * params.rho_a;
  return attr_information >= std::log(static_cast<double>(params.n)) ? Regime::AttrRich
                                                                     : Regime::AttrSparse;
}

const char* regime_name(Regime regime) {
  return regime == Regime::AttrSparse ? "sparse" : "rich";
}

int count_common_user_neighbors(const AttributedGraphPair& pair, const std::map<int, int>& pi,
                                int i, int j) {
  const int n = pair.params.n;
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::out_of_range("count_common_user_neighbors: index out of range");
  int count = 0;
  for (const auto& [u, v] : pi) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::out_of_range("count_common_user_neighbors: mapping out of range");
    // The zero diagonal rules out u == i and pi(u) == j contributions.
    if (pair.g1.user_edge(i, u) && pair.g2.user_edge(j, v)) ++count;
  }
  return count;
}

int count_common_attribute_neighbors(const AttributedGraphPair& pair, int i, int j) {
  const int n = pair.params.n;
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::out_of_range("count_common_attribute_neighbors: index out of range");
  if (pair.params.m == 0) return 0;
  return BitMatrix::row_and_popcount(pair.g1.attr_adj, i, pair.g2.attr_adj, j);
}

Permutation RefineResult::to_permutation() const {
  if (!complete) throw std::logic_error("RefineResult: mapping is not complete");
  return Permutation(mapping);
}

namespace {

// Shared greedy engine: acceptance predicate is
//   user_counts(i,j) >= user_threshold  OR  attr_counts(i,j) >= attr_threshold
// with either threshold possibly +inf.
RefineResult refine_greedy(const AttributedGraphPair& pair, const PartialAlignment& partial,
                           double user_threshold, double attr_threshold,
                           const RefineObserver& observer) {
  const int n = pair.params.n;
  partial.validate(n);

  RefineResult result;
  result.mapping.assign(static_cast<std::size_t>(n), -1);
  std::vector<bool> matched_left(static_cast<std::size_t>(n), false);
  std::vector<bool> matched_right(static_cast<std::size_t>(n), false);
  for (const auto& [i, j] : partial.map) {
    result.mapping[static_cast<std::size_t>(i)] = j;
    matched_left[static_cast<std::size_t>(i)] = true;
    matched_right[static_cast<std::size_t>(j)] = true;
  }

  const bool use_attr = std::isfinite(attr_threshold);
  NeighborCounters counters;
  counters.user_counts = Eigen::MatrixXi::Zero(n, n);
  counters.attr_counts = Eigen::MatrixXi::Zero(n, n);
  if (pair.params.m > 0)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        counters.attr_counts(i, j) = count_common_attribute_neighbors(pair, i, j);

  // Initial matched-common-neighbor counts, packed over the seed domain so
  // each (i, j) count is one AND+popcount pass.
  {
    const int dom = static_cast<int>(partial.map.size());
    BitMatrix left(n, std::max(dom, 1));
    BitMatrix right(n, std::max(dom, 1));
    int slot = 0;
    for (const auto& [u, v] : partial.map) {
      for (int i = 0; i < n; ++i) {
        if (pair.g1.user_edge(i, u)) left.set(i, slot);
        if (pair.g2.user_edge(i, v)) right.set(i, slot);
      }
      ++slot;
    }
    for (int i = 0; i < n; ++i) {
      if (matched_left[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < n; ++j) {
        if (matched_right[static_cast<std::size_t>(j)]) continue;
        counters.user_counts(i, j) = BitMatrix::row_and_popcount(left, i, right, j);
      }
    }
  }

  auto qualifies = [&](int i, int j) {
    return static_cast<double>(counters.user_counts(i, j)) >= user_threshold ||
           (use_attr && static_cast<double>(counters.attr_counts(i, j)) >= attr_threshold);
  };

  std::deque<std::pair<int, int>> queue;
  for (int i = 0; i < n; ++i) {
    if (matched_left[static_cast<std::size_t>(i)]) continue;
    for (int j = 0; j < n; ++j) {
      if (matched_right[static_cast<std::size_t>(j)]) continue;
      if (qualifies(i, j)) queue.emplace_back(i, j);
    }
  }

  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    if (matched_left[static_cast<std::size_t>(i)] || matched_right[static_cast<std::size_t>(j)])
      continue;
    matched_left[static_cast<std::size_t>(i)] = true;
    matched_right[static_cast<std::size_t>(j)] = true;
    result.mapping[static_cast<std::size_t>(i)] = j;
    ++result.extended;

    // Only pairs adjacent to the new match gain a common neighbor; a pair is
    // enqueued exactly when it first starts qualifying.
    for (int u = 0; u < n; ++u) {
      if (matched_left[static_cast<std::size_t>(u)] || !pair.g1.user_edge(u, i)) continue;
      for (int v = 0; v < n; ++v) {
        if (matched_right[static_cast<std::size_t>(v)] || !pair.g2.user_edge(v, j)) continue;
        const bool qualified_before = qualifies(u, v);
        ++counters.user_counts(u, v);
        if (!qualified_before && qualifies(u, v)) queue.emplace_back(u, v);
      }
    }
    if (observer) observer(counters, result.mapping);
  }

  result.complete = true;
  for (bool matched : matched_left) result.complete = result.complete && matched;
  return result;
}

double scaled_threshold(double gamma, double base) {
  if (!(gamma > 1.0)) throw std::invalid_argument("refine: gamma must be > 1");
  // gamma == +inf encodes a disabled clause even when base == 0.
  if (std::isinf(gamma)) return std::numeric_limits<double>::infinity();
  return gamma * base;
}

}  // namespace

RefineResult refine_attr_sparse(const AttributedGraphPair& pair, const PartialAlignment& partial,
                                double gamma1, const RefineObserver& observer) {
  const double base = (pair.params.n - 2) * pair.params.q_u * pair.params.q_u;
  return refine_greedy(pair, partial, scaled_threshold(gamma1, base),
                       std::numeric_limits<double>::infinity(), observer);
}

RefineResult refine_attr_rich(const AttributedGraphPair& pair, const PartialAlignment& partial,
                              double gamma2, double gamma3, const RefineObserver& observer) {
  const double user_base = (pair.params.n - 2) * pair.params.q_u * pair.params.q_u;
  const double attr_base = pair.params.m * pair.params.q_a * pair.params.q_a;
  const double attr_threshold = pair.params.m == 0 ? std::numeric_limits<double>::infinity()
                                                   : scaled_threshold(gamma3, attr_base);
  return refine_greedy(pair, partial, scaled_threshold(gamma2, user_base), attr_threshold,
                       observer);
}

std::string refine_result_to_json(const RefineResult& result) {
  nlohmann::ordered_json j;
  j["permutation"] = result.mapping;
  j["complete"] = result.complete;
  j["extended"] = result.extended;
  return j.dump();
}

RefineResult refine_result_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RefineResult result;
  result.mapping = j.at("permutation").get<std::vector<int>>();
  result.complete = j.at("complete").get<bool>();
  result.extended = j.at("extended").get<int>();
  return result;
}

}  // namespace aga
