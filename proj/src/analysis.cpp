#include "aga/analysis.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "aga/counting.hpp"

namespace aga {

namespace {

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double expected_similarity(const ModelParams& params, int k) {
  params.validate();
  if (k < 1 || k > std::min(params.m, params.n - 1))
    throw std::invalid_argument("expected_similarity: k out of [1, min(m, n-1)]");
  if (params.rho_u == 0.0 || params.rho_a == 0.0) return 0.0;
  const double log_value = log_choose(params.m, k) + log_choose(params.n - 1, k) +
                           std::lgamma(k + 1.0) +
                           k * std::log(params.rho_u * params.sigma2_u()) +
                           k * std::log(params.rho_a * params.sigma2_a());
  return std::exp(log_value);
}

double cross_moment_exact(double q, double rho, int m1, int m2) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("cross_moment_exact: q out of (0,1)");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("cross_moment_exact: rho out of [0,1]");
  if (m1 > m2) std::swap(m1, m2);  // moments are symmetric in the two graphs
  const double sigma2 = q * (1.0 - q);
  if (m1 == 1 && m2 == 1) return rho;
  if (m1 == 0 && m2 == 2) return 1.0;
  if (m1 == 1 && m2 == 2) return rho * (1.0 - 2.0 * q) / std::sqrt(sigma2);
  if (m1 == 2 && m2 == 2) return 1.0 + rho * (1.0 - 2.0 * q) * (1.0 - 2.0 * q) / sigma2;
  throw std::invalid_argument("cross_moment_exact: unsupported exponent pair");
}

double cross_moment_enumerate(double q, double rho, int m1, int m2) {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("cross_moment_enumerate: q out of (0,1)");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("cross_moment_enumerate: rho out of [0,1]");
  if (m1 < 0 || m2 < 0) throw std::invalid_argument("cross_moment_enumerate: negative exponent");
  const double cov = rho * q * (1.0 - q);
  const double p11 = q * q + cov;
  const double p10 = q * (1.0 - q) - cov;
  const double p00 = (1.0 - q) * (1.0 - q) + cov;
  const double present = 1.0 - q;  // centered value of a present edge
  const double absent = -q;
  const double moment = p11 * std::pow(present, m1) * std::pow(present, m2) +
                        p10 * std::pow(present, m1) * std::pow(absent, m2) +
                        p10 * std::pow(absent, m1) * std::pow(present, m2) +
                        p00 * std::pow(absent, m1) * std::pow(absent, m2);
  return moment / std::pow(std::sqrt(q * (1.0 - q)), m1 + m2);
}

bool ConditionReport::all_pass() const {
  return almost_degree && almost_attr_correlation && almost_user_correlation &&
         almost_attr_info_1 && almost_attr_info_2 && exact_degree && exact_user_ratio &&
         exact_attr_ratio;
}

ConditionReport check_conditions(const ModelParams& params, int k, double epsilon) {
  params.validate();
  if (k < 1) throw std::invalid_argument("check_conditions: k must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("check_conditions: epsilon must be > 0");

  ConditionReport report;
  report.k = k;
  report.epsilon = epsilon;
  const double n = params.n;
  const double m = params.m;
  const double log_n = std::log(n);

  report.n_qu_rhou = n * params.q_u * params.rho_u;
  report.m_rhoa2_rhou2 = m * params.rho_a * params.rho_a * params.rho_u * params.rho_u;
  report.n_rhou2 = n * params.rho_u * params.rho_u;
  report.n_pow_2_over_k = std::pow(n, 2.0 / k);
  report.m_qa_rhoa = m * params.q_a * params.rho_a;
  report.attr_info_target_1 =
      report.n_rhou2 > 0.0 ? report.n_pow_2_over_k / report.n_rhou2
                           : std::numeric_limits<double>::infinity();
  report.attr_info_target_2 = report.n_qu_rhou > 0.0
                                  ? 1.0 / report.n_qu_rhou
                                  : std::numeric_limits<double>::infinity();

  report.exact_lhs = n * params.q_u * params.s_u() + m * params.q_a * params.s_a();
  report.exact_rhs = (1.0 + epsilon) * log_n;
  report.user_ratio = params.rho_u * (1.0 - params.q_u) / params.q_u;
  report.attr_ratio = params.rho_a * (1.0 - params.q_a) / params.q_a;

  report.almost_degree = report.n_qu_rhou > 1.0;
  report.almost_attr_correlation = report.m_rhoa2_rhou2 > report.n_pow_2_over_k;
  report.almost_user_correlation = report.n_rhou2 > report.n_pow_2_over_k;
  report.almost_attr_info_1 = report.m_qa_rhoa > report.attr_info_target_1;
  report.almost_attr_info_2 = report.m_qa_rhoa > report.attr_info_target_2;
  report.exact_degree = report.exact_lhs >= report.exact_rhs;
  report.exact_user_ratio = report.user_ratio >= epsilon;
  report.exact_attr_ratio = report.attr_ratio >= epsilon;
  return report;
}

std::string condition_report_to_json(const ConditionReport& report) {
  nlohmann::ordered_json j;
  j["note"] = "finite-sample surrogates, not guarantees";
  j["k"] = report.k;
  j["epsilon"] = report.epsilon;
  auto& values = j["values"] = nlohmann::ordered_json::object();
  values["n_qu_rhou"] = report.n_qu_rhou;
  values["m_rhoa2_rhou2"] = report.m_rhoa2_rhou2;
  values["n_rhou2"] = report.n_rhou2;
  values["n_pow_2_over_k"] = report.n_pow_2_over_k;
  values["m_qa_rhoa"] = report.m_qa_rhoa;
  values["attr_info_target_1"] = report.attr_info_target_1;
  values["attr_info_target_2"] = report.attr_info_target_2;
  values["exact_lhs"] = report.exact_lhs;
  values["exact_rhs"] = report.exact_rhs;
  values["user_ratio"] = report.user_ratio;
  values["attr_ratio"] = report.attr_ratio;
  auto& verdicts = j["verdicts"] = nlohmann::ordered_json::object();
  verdicts["almost_degree"] = report.almost_degree;
  verdicts["almost_attr_correlation"] = report.almost_attr_correlation;
  verdicts["almost_user_correlation"] = report.almost_user_correlation;
  verdicts["almost_attr_info_1"] = report.almost_attr_info_1;
  verdicts["almost_attr_info_2"] = report.almost_attr_info_2;
  verdicts["exact_degree"] = report.exact_degree;
  verdicts["exact_user_ratio"] = report.exact_user_ratio;
  verdicts["exact_attr_ratio"] = report.exact_attr_ratio;
  j["all_pass"] = report.all_pass();
  return j.dump(2);
}

bool MomentEstimates::true_within(double num_se) const {
  return se_defined && std::abs(mean_true - analytic_true) <= num_se * se_true;
}

bool MomentEstimates::wrong_within(double num_se) const {
  return se_defined && std::abs(mean_wrong - analytic_wrong) <= num_se * se_wrong;
}

MomentEstimates empirical_moments(const ModelParams& params, int k, int trials,
                                  std::uint64_t seed, int jobs) {
  params.validate();
  if (params.n < 2) throw std::invalid_argument("empirical_moments: need n >= 2");
  if (trials < 1) throw std::invalid_argument("empirical_moments: trials must be >= 1");

  std::vector<double> true_scores(static_cast<std::size_t>(trials));
  std::vector<double> wrong_scores(static_cast<std::size_t>(trials));
  auto run_trial = [&](int t) {
    const std::uint64_t child = Rng::derive_seed(seed, 0, static_cast<std::uint64_t>(t));
    const AttributedGraphPair pair = generate_pair_identity_truth(params, child);
    const SimilarityMatrix scores = similarity_matrix(pair, k);
    true_scores[static_cast<std::size_t>(t)] = scores(0, 0);
    wrong_scores[static_cast<std::size_t>(t)] = scores(0, 1);
  };

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) run_trial(t);
      });
    for (auto& worker : workers) worker.join();
  }

  auto mean_of = [&](const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
  };
  auto variance_of = [&](const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double x : xs) sum += (x - mean) * (x - mean);
    return sum / static_cast<double>(xs.size() - 1);
  };

  MomentEstimates est;
  est.trials = trials;
  est.se_defined = trials >= 2;
  est.mean_true = mean_of(true_scores);
  est.mean_wrong = mean_of(wrong_scores);
  est.var_true = variance_of(true_scores, est.mean_true);
  est.var_wrong = variance_of(wrong_scores, est.mean_wrong);
  est.se_true = std::sqrt(est.var_true / trials);
  est.se_wrong = std::sqrt(est.var_wrong / trials);
  est.analytic_true = expected_similarity(params, k);
  est.analytic_wrong = kExpectedSimilarityOffDiagonal;
  return est;
}

std::string moment_estimates_to_json(const MomentEstimates& est) {
  nlohmann::ordered_json j;
  j["trials"] = est.trials;
  j["true_pair"] = {{"mean", est.mean_true},
                    {"se", est.se_true},
                    {"var", est.var_true},
                    {"analytic", est.analytic_true},
                    {"within_4se", est.true_within(4.0)}};
  j["wrong_pair"] = {{"mean", est.mean_wrong},
                     {"se", est.se_wrong},
                     {"var", est.var_wrong},
                     {"analytic", est.analytic_wrong},
                     {"within_4se", est.wrong_within(4.0)}};
  j["se_defined"] = est.se_defined;
  return j.dump(2);
}

}  // namespace aga
