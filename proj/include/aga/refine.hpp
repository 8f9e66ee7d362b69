#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aga/counting.hpp"
#include "aga/model.hpp"

namespace aga {

// Rate function x log x - x + 1 (natural log): zero at 1, decreasing on
// (0,1), increasing on (1,inf).
double f_eval(double x);

// Inverse of f on the increasing branch: the unique gamma > 1 with
// f(gamma) = y, located to |f(gamma) - y| <= 1e-12 * max(1, y).
double solve_f_upper(double y);

// Threshold multipliers for the refinement loops. gamma1 (== gamma2) solves
// f(g) = 3 log n / ((n-2) q_u^2) and gamma3 solves f(g) = 3 log n / (m q_a^2),
// each on the increasing branch. A vanishing denominator (n == 2 or m == 0)
// yields +inf, which disables the corresponding acceptance clause.
struct RefineThresholds {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
};

RefineThresholds compute_refine_thresholds(const ModelParams& params);

enum class Regime { AttrSparse, AttrRich };

// Finite-sample surrogate of the regime split: AttrRich iff the expected
// common-attribute-neighbor count m q_a rho_a reaches log n (ties go to rich).
Regime select_regime(const ModelParams& params);

const char* regime_name(Regime regime);

// #{u in dom(pi): (i,u) in g1 and (j, pi(u)) in g2}.
int count_common_user_neighbors(const AttributedGraphPair& pair, const std::map<int, int>& pi,
                                int i, int j);

// #{a: (i,a) in g1 and (j,a) in g2}; independent of any mapping.
int count_common_attribute_neighbors(const AttributedGraphPair& pair, int i, int j);

// Live neighbor-count state of a refinement run; user_counts is maintained
// incrementally and only meaningful on currently unmatched pairs,
// attr_counts is static.
struct NeighborCounters {
  Eigen::MatrixXi user_counts;
  Eigen::MatrixXi attr_counts;
};

struct RefineResult {
  std::vector<int> mapping;  // length n, -1 where unmatched
  bool complete = false;     // true iff every user is mapped
  int extended = 0;          // matches added beyond the seed alignment

  Permutation to_permutation() const;  // throws unless complete
};

// Observer invoked after every greedy extension, with the counters and the
// mapping as they stand. Used by tests to compare the incremental counters
// against a from-scratch recount.
using RefineObserver = std::function<void(const NeighborCounters&, const std::vector<int>&)>;

// Greedy completion using matched common user neighbors only: while some
// unmatched pair (i, j) has user_counts(i,j) >= gamma1 (n-2) q_u^2, match it.
// Qualifying pairs are processed in first-crossing order (initial qualifiers
// in lexicographic order), counters are updated incrementally over the
// neighbors of the newly matched pair. Never edits the seed alignment; if
// the loop stalls before covering every user the partial mapping is returned
// with complete = false.
RefineResult refine_attr_sparse(const AttributedGraphPair& pair, const PartialAlignment& partial,
                                double gamma1, const RefineObserver& observer = nullptr);

// Same loop with the second acceptance clause
// attr_counts(i,j) >= gamma3 m q_a^2 for regimes with rich attribute
// information. With m == 0 the attribute clause is vacuous and the run
// degenerates to refine_attr_sparse with gamma2.
RefineResult refine_attr_rich(const AttributedGraphPair& pair, const PartialAlignment& partial,
                              double gamma2, double gamma3,
                              const RefineObserver& observer = nullptr);

std::string refine_result_to_json(const RefineResult& result);
RefineResult refine_result_from_json(const std::string& text);

}  // namespace aga
