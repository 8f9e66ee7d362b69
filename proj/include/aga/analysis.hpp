#pragma once

#include <cstdint>
#include <string>

#include "aga/model.hpp"

namespace aga {

// Expected similarity score of a true pair,
//   E = C(m,k) (rho_u sigma_u^2)^k (rho_a sigma_a^2)^k C(n-1,k) k!,
// evaluated in log space so large (n, m, k) cannot overflow intermediates.
// The wrong-pair expectation is exactly zero.
double expected_similarity(const ModelParams& params, int k);

inline constexpr double kExpectedSimilarityOffDiagonal = 0.0;

// Exact normalized cross moments sigma^-(m1+m2) E[A~^m1 B~^m2] of one
// centered correlated edge pair, for the six exponent pairs with closed
// forms:
//   (1,1) -> rho, (2,0)/(0,2) -> 1,
//   (2,1)/(1,2) -> rho (1-2q)/sqrt(q(1-q)),
//   (2,2) -> 1 + rho (1-2q)^2 / (q(1-q)).
// The equalities hold for all q in (0,1); bound-style uses of these moments
// usually assume q <= 1/2, where the (2,1) form is also nonnegative. Other
// exponent pairs are served by cross_moment_enumerate.
double cross_moment_exact(double q, double rho, int m1, int m2);

// Same moment by enumerating the four joint outcomes with their
// probabilities; the oracle for cross_moment_exact and the general fallback
// for arbitrary small exponents.
double cross_moment_enumerate(double q, double rho, int m1, int m2);

// Finite-sample readout of the asymptotic feasibility conditions. The
// boolean verdicts are documented surrogates (an asymptotic statement cannot
// be satisfied by one finite instance): omega(1) terms pass when the raw
// magnitude exceeds 1, omega(target) terms when the magnitude exceeds its
// target, and the exact-recovery inequalities are evaluated literally at the
// given epsilon.
struct ConditionReport {
  int k = 0;
  double epsilon = 0.0;

  double n_qu_rhou = 0.0;        // vs 1
  double m_rhoa2_rhou2 = 0.0;    // vs n^{2/k}
  double n_rhou2 = 0.0;          // vs n^{2/k}
  double n_pow_2_over_k = 0.0;
  double m_qa_rhoa = 0.0;        // vs both attr-information targets
  double attr_info_target_1 = 0.0;  // n^{2/k} / (n rho_u^2)
  double attr_info_target_2 = 0.0;  // 1 / (n q_u rho_u)

  double exact_lhs = 0.0;  // n q_u s_u + m q_a s_a
  double exact_rhs = 0.0;  // (1+eps) log n
  double user_ratio = 0.0;  // rho_u (1-q_u) / q_u, vs eps
  double attr_ratio = 0.0;  // rho_a (1-q_a) / q_a, vs eps

  bool almost_degree = false;
  bool almost_attr_correlation = false;
  bool almost_user_correlation = false;
  bool almost_attr_info_1 = false;
  bool almost_attr_info_2 = false;
  bool exact_degree = false;
  bool exact_user_ratio = false;
  bool exact_attr_ratio = false;

  bool all_pass() const;
};

ConditionReport check_conditions(const ModelParams& params, int k, double epsilon);

std::string condition_report_to_json(const ConditionReport& report);

// Monte Carlo moments of the similarity score at one fixed true pair (0,0)
// and one fixed wrong pair (0,1), under the identity-truth hook. Trials are
// independent child-seeded streams; aggregation order is by trial index, so
// the estimates do not depend on the number of worker threads.
struct MomentEstimates {
  int trials = 0;
  double mean_true = 0.0;
  double se_true = 0.0;
  double var_true = 0.0;
  double mean_wrong = 0.0;
  double se_wrong = 0.0;
  double var_wrong = 0.0;
  double analytic_true = 0.0;
  double analytic_wrong = 0.0;
  bool se_defined = false;  // false when trials < 2 (SE reported as +inf)

  bool true_within(double num_se) const;
  bool wrong_within(double num_se) const;
};

MomentEstimates empirical_moments(const ModelParams& params, int k, int trials,
                                  std::uint64_t seed, int jobs = 1);

std::string moment_estimates_to_json(const MomentEstimates& estimates);

}  // namespace aga
