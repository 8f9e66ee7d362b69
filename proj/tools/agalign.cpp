// Command-line front end: pair generation, alignment, refinement, the
// end-to-end pipeline, grid experiments, moment estimation, condition
// reports and a built-in verification suite.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error, 3 failed check
// (verify subcommand).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aga/analysis.hpp"
#include "aga/bipartite.hpp"
#include "aga/counting.hpp"
#include "aga/harness.hpp"
#include "aga/model.hpp"
#include "aga/pair_io.hpp"
#include "aga/refine.hpp"
#include "aga/rng.hpp"

namespace {

struct ParamFlags {
  int n = 0;
  int m = 0;
  double q_u = 0.0;
  double rho_u = 0.0;
  double q_a = 0.0;
  double rho_a = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--n", n, "user count")->required();
    cmd->add_option("--m", m, "attribute count")->required();
    cmd->add_option("--qu", q_u, "user-user edge probability")->required();
    cmd->add_option("--rhou", rho_u, "user-user edge correlation")->required();
    cmd->add_option("--qa", q_a, "user-attribute edge probability")->required();
    cmd->add_option("--rhoa", rho_a, "user-attribute edge correlation")->required();
  }

  aga::ModelParams to_params() const {
    aga::ModelParams params{n, m, q_u, rho_u, q_a, rho_a};
    params.validate();
    return params;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text << '\n';
  else
    write_text(out_path, text);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---- verify: compact self-check of the oracle/property pairs ----

bool verify_counting_oracle(std::uint64_t seed, std::ostream& log) {
  aga::Rng rng(seed);
  for (int instance = 0; instance < 60; ++instance) {
    const int n = 3 + static_cast<int>(rng.next_below(6));
    const int m = 1 + static_cast<int>(rng.next_below(5));
    const int k = 1 + static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(std::min({3, n - 1, m}))));
    aga::ModelParams params{n, m, 0.1 + 0.8 * rng.next_unit(), rng.next_unit(),
                            0.1 + 0.8 * rng.next_unit(), rng.next_unit()};
    const auto pair = aga::generate_pair(params, rng.next_u64());
    const auto norm = aga::normalize(pair.g1, params);
    std::vector<int> attrs(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) attrs[static_cast<std::size_t>(a)] = a;
    attrs.resize(static_cast<std::size_t>(k));
    const int root = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    const auto table = aga::path_weight_table(norm, root);
    const double fast = aga::tree_count(table, attrs);
    const auto brute = aga::tree_count_bruteforce(norm, root, attrs);
    const double tol = 1e-9 * std::max(1.0, std::abs(brute.value));
    if (std::abs(fast - brute.value) > tol) {
      log << "counting oracle mismatch at instance " << instance << '\n';
      return false;
    }
    std::uint64_t expected_trees = 1;
    for (int t = 0; t < k; ++t) expected_trees *= static_cast<std::uint64_t>(n - 1 - t);
    if (brute.trees != expected_trees) {
      log << "tree family size mismatch at instance " << instance << '\n';
      return false;
    }
  }
  return true;
}

bool verify_cross_moments(std::ostream& log) {
  const std::pair<int, int> exponents[] = {{1, 1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}, {2, 2}};
  for (double q : {0.1, 0.2, 0.3, 0.4, 0.5})
    for (double rho : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0})
      for (const auto& [m1, m2] : exponents) {
        const double exact = aga::cross_moment_exact(q, rho, m1, m2);
        const double enumerated = aga::cross_moment_enumerate(q, rho, m1, m2);
        if (std::abs(exact - enumerated) > 1e-12) {
          log << "cross moment mismatch at q=" << q << " rho=" << rho << " (" << m1 << ','
              << m2 << ")\n";
          return false;
        }
      }
  return true;
}

bool verify_root_solver(std::ostream& log) {
  for (int step = 0; step <= 110; ++step) {
    const double y = std::pow(10.0, -8.0 + 0.1 * step);
    const double gamma = aga::solve_f_upper(y);
    if (!(gamma > 1.0) || std::abs(aga::f_eval(gamma) - y) > 1e-12 * std::max(1.0, y)) {
      log << "solver residual too large at y=" << y << '\n';
      return false;
    }
  }
  return std::abs(aga::solve_f_upper(1.0) - std::exp(1.0)) <= 1e-9;
}

bool verify_assignment(std::uint64_t seed, std::ostream& log) {
  aga::Rng rng(seed);
  for (int instance = 0; instance < 25; ++instance) {
    const int n = 2 + static_cast<int>(rng.next_below(5));
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w(i, j) = 2.0 * rng.next_unit() - 1.0;
    const aga::Permutation got = aga::max_weight_assignment(w);
    double got_total = 0.0;
    for (int i = 0; i < n; ++i) got_total += w(i, got(i));

    std::vector<int> images(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) images[static_cast<std::size_t>(i)] = i;
    double best = -1e300;
    do {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += w(i, images[static_cast<std::size_t>(i)]);
      best = std::max(best, total);
    } while (std::next_permutation(images.begin(), images.end()));
    if (std::abs(got_total - best) > 1e-9) {
      log << "assignment suboptimal at instance " << instance << '\n';
      return false;
    }
  }
  return true;
}

bool verify_pair_roundtrip(std::uint64_t seed, std::ostream& log) {
  aga::ModelParams params{9, 4, 0.35, 0.7, 0.45, 0.25};
  const auto pair = aga::generate_pair(params, seed);
  std::ostringstream buffer;
  aga::write_pair(pair, buffer);
  std::istringstream input(buffer.str());
  if (!(aga::read_pair(input) == pair)) {
    log << "pair file round trip not identity\n";
    return false;
  }
  return true;
}

int run_verify(std::uint64_t seed) {
  struct Check {
    const char* name;
    bool passed;
  };
  std::ostringstream log;
  const Check checks[] = {
      {"counting-oracle", verify_counting_oracle(seed, log)},
      {"cross-moments", verify_cross_moments(log)},
      {"root-solver", verify_root_solver(log)},
      {"assignment-bruteforce", verify_assignment(seed + 1, log)},
      {"pair-roundtrip", verify_pair_roundtrip(seed + 2, log)},
  };
  bool all = true;
  for (const Check& check : checks) {
    std::cout << (check.passed ? "ok   " : "FAIL ") << check.name << '\n';
    all = all && check.passed;
  }
  if (!all) std::cerr << log.str();
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attributed graph alignment toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "sample a correlated attributed graph pair");
  ParamFlags gen_params;
  gen_params.add_to(gen);
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "rng seed")->required();
  gen->add_option("--out", gen_out, "output pair file")->required();

  // align
  auto* align = app.add_subcommand("align", "counting alignment on a pair file");
  std::string align_pair, align_out;
  int align_k = 2;
  double align_c = 0.5;
  align->add_option("--pair", align_pair, "pair file")->required();
  align->add_option("--k", align_k, "branch count")->required();
  align->add_option("--c", align_c, "threshold fraction in (0,1)");
  align->add_option("--out", align_out, "output partial-alignment JSON");

  // refine
  auto* refine = app.add_subcommand("refine", "complete a partial alignment");
  std::string refine_pair, refine_partial, refine_regime = "auto", refine_out;
  refine->add_option("--pair", refine_pair, "pair file")->required();
  refine->add_option("--partial", refine_partial, "partial-alignment JSON file")->required();
  refine->add_option("--regime", refine_regime, "auto|sparse|rich")
      ->check(CLI::IsMember({"auto", "sparse", "rich"}));
  refine->add_option("--out", refine_out, "output refined JSON");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "counting + refinement (or MAP) end to end");
  std::string pipe_pair, pipe_mode = "auto", pipe_out;
  int pipe_k = 2;
  double pipe_c = 0.5, pipe_eps = 0.1;
  pipeline->add_option("--pair", pipe_pair, "pair file")->required();
  pipeline->add_option("--k", pipe_k, "branch count")->required();
  pipeline->add_option("--c", pipe_c, "threshold fraction in (0,1)");
  pipeline->add_option("--mode", pipe_mode,
                       "counting-only|counting+sparse|counting+rich|bipartite-map|auto");
  pipeline->add_option("--epsilon", pipe_eps, "dispatch epsilon");
  pipeline->add_option("--out", pipe_out, "output JSON");

  // map-bipartite
  auto* mapb = app.add_subcommand("map-bipartite", "attribute-only MAP alignment");
  std::string mapb_pair, mapb_out;
  mapb->add_option("--pair", mapb_pair, "pair file")->required();
  mapb->add_option("--out", mapb_out, "output JSON");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "seeded Monte Carlo grid experiment");
  std::string exp_config;
  int exp_jobs = 0;
  experiment->add_option("--config", exp_config, "experiment config JSON file")->required();
  experiment->add_option("--jobs", exp_jobs, "cap on concurrent trials (overrides config)");

  // moments
  auto* moments = app.add_subcommand("moments", "empirical vs analytic similarity moments");
  ParamFlags mom_params;
  mom_params.add_to(moments);
  int mom_k = 2, mom_trials = 1000, mom_jobs = 1;
  std::uint64_t mom_seed = 0;
  std::string mom_out;
  moments->add_option("--k", mom_k, "branch count")->required();
  moments->add_option("--trials", mom_trials, "trial count")->required();
  moments->add_option("--seed", mom_seed, "rng seed")->required();
  moments->add_option("--jobs", mom_jobs, "concurrent trials");
  moments->add_option("--out", mom_out, "output JSON");

  // check-conditions
  auto* conditions = app.add_subcommand("check-conditions", "finite-sample condition report");
  ParamFlags cond_params;
  cond_params.add_to(conditions);
  int cond_k = 3;
  double cond_eps = 0.1;
  std::string cond_out;
  conditions->add_option("--k", cond_k, "branch count")->required();
  conditions->add_option("--epsilon", cond_eps, "epsilon");
  conditions->add_option("--out", cond_out, "output JSON");

  // verify
  auto* verify = app.add_subcommand("verify", "run the built-in oracle/property suite");
  std::uint64_t verify_seed = 0;
  verify->add_option("--seed", verify_seed, "rng seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      const auto pair = aga::generate_pair(gen_params.to_params(), gen_seed);
      aga::write_pair(pair, gen_out);
    } else if (align->parsed()) {
      const auto pair = aga::read_pair(align_pair);
      const auto partial = aga::align_by_counting(pair, align_k, align_c);
      emit(align_out, aga::partial_alignment_to_json(partial));
    } else if (refine->parsed()) {
      const auto pair = aga::read_pair(refine_pair);
      const auto partial = aga::partial_alignment_from_json(read_text(refine_partial),
                                                            pair.params.n);
      const auto thresholds = aga::compute_refine_thresholds(pair.params);
      aga::Regime regime;
      if (refine_regime == "auto")
        regime = aga::select_regime(pair.params);
      else
        regime = refine_regime == "rich" ? aga::Regime::AttrRich : aga::Regime::AttrSparse;
      const aga::RefineResult result =
          regime == aga::Regime::AttrRich
              ? aga::refine_attr_rich(pair, partial, thresholds.gamma2, thresholds.gamma3)
              : aga::refine_attr_sparse(pair, partial, thresholds.gamma1);
      emit(refine_out, aga::refine_result_to_json(result));
    } else if (pipeline->parsed()) {
      const auto pair = aga::read_pair(pipe_pair);
      const auto out = aga::run_pipeline(pair, pipe_k, pipe_c,
                                         aga::pipeline_mode_from_string(pipe_mode), pipe_eps);
      std::ostringstream json;
      json << "{\"regime\":\"" << out.regime << "\",\"partial\":"
           << aga::partial_alignment_to_json(out.partial) << ",\"final\":";
      json << '[';
      for (std::size_t i = 0; i < out.final_mapping.size(); ++i)
        json << (i ? "," : "") << out.final_mapping[i];
      json << "],\"metrics\":{\"precision\":" << out.metrics.precision_on_matched
           << ",\"coverage\":" << out.metrics.coverage
           << ",\"accuracy\":" << out.metrics.final_accuracy
           << ",\"exact\":" << (out.metrics.exact ? "true" : "false") << "}}";
      emit(pipe_out, json.str());
    } else if (mapb->parsed()) {
      const auto pair = aga::read_pair(mapb_pair);
      const auto estimate = aga::align_bipartite_map(pair);
      std::ostringstream json;
      json << "{\"permutation\":[";
      for (int i = 0; i < estimate.size(); ++i) json << (i ? "," : "") << estimate(i);
      json << "],\"margin\":" << aga::bipartite_recovery_margin(pair.params) << '}';
      emit(mapb_out, json.str());
    } else if (experiment->parsed()) {
      auto config = aga::experiment_config_from_json(read_text(exp_config));
      if (exp_jobs > 0) config.jobs = exp_jobs;
      const auto results = aga::run_experiment(config);
      if (config.csv_path.empty()) std::cout << results.csv;
    } else if (moments->parsed()) {
      const auto estimates = aga::empirical_moments(mom_params.to_params(), mom_k, mom_trials,
                                                    mom_seed, mom_jobs);
      emit(mom_out, aga::moment_estimates_to_json(estimates));
    } else if (conditions->parsed()) {
      const auto report = aga::check_conditions(cond_params.to_params(), cond_k, cond_eps);
      emit(cond_out, aga::condition_report_to_json(report));
    } else if (verify->parsed()) {
      return run_verify(verify_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
