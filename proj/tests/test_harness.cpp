#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "aga/bipartite.hpp"
#include "aga/harness.hpp"

using namespace aga;

namespace {

const char* kSmallConfig = R"({
  "n": [24], "m": [10],
  "q_u": [0.4], "rho_u": [0.9],
  "q_a": [0.4], "rho_a": [0.9],
  "k": 2, "c": 0.5, "trials": 3, "base_seed": 5,
  "mode": "auto", "epsilon": 0.1
})";

}  // namespace

TEST_CASE("compute_metrics") {
  const Permutation truth({1, 2, 0, 3});

  SUBCASE("exact mapping") {
    PartialAlignment partial;
    partial.matched = {0, 1, 2, 3};
    partial.map = {{0, 1}, {1, 2}, {2, 0}, {3, 3}};
    const auto metrics = compute_metrics(partial, truth.images(), truth);
    CHECK(metrics.exact);
    CHECK(metrics.final_accuracy == 1.0);
    CHECK(metrics.precision_on_matched == 1.0);
    CHECK(metrics.coverage == 1.0);
  }

  SUBCASE("empty index set is vacuously precise") {
    const std::vector<int> nothing(4, -1);
    const auto metrics = compute_metrics(PartialAlignment{}, nothing, truth);
    CHECK(metrics.precision_on_matched == 1.0);
    CHECK(metrics.coverage == 0.0);
    CHECK(metrics.final_accuracy == 0.0);
    CHECK_FALSE(metrics.exact);
  }

  SUBCASE("partial credit") {
    PartialAlignment partial;
    partial.matched = {0, 1};
    partial.map = {{0, 1}, {1, 0}};  // 1 -> 0 is wrong
    std::vector<int> final_mapping = {1, 0, -1, 3};
    const auto metrics = compute_metrics(partial, final_mapping, truth);
    CHECK(metrics.precision_on_matched == doctest::Approx(0.5));
    CHECK(metrics.coverage == doctest::Approx(0.5));
    CHECK(metrics.final_accuracy == doctest::Approx(0.5));
    CHECK_FALSE(metrics.exact);
  }

  SUBCASE("mapping length must match") {
    const std::vector<int> short_mapping(3, -1);
    CHECK_THROWS_AS(compute_metrics(PartialAlignment{}, short_mapping, truth),
                    std::invalid_argument);
  }
}

TEST_CASE("run_pipeline") {
  SUBCASE("noiseless favorable density is exact") {
    // Dense attributes dominate: the auto dispatcher goes attribute-only and
    // perfectly correlated distinct profiles pin the truth.
    ModelParams p{40, 60, 0.05, 1.0, 0.4, 1.0};
    const auto pair = generate_pair(p, 6);
    const auto out = run_pipeline(pair, 2, 0.5, PipelineMode::Auto);
    CHECK(out.regime == "bipartite");
    CHECK(out.metrics.exact);
  }

  SUBCASE("counting-only returns the partial as the final mapping") {
    ModelParams p{30, 10, 0.4, 0.9, 0.4, 0.9};
    const auto pair = generate_pair(p, 9);
    const auto out = run_pipeline(pair, 2, 0.5, PipelineMode::CountingOnly);
    CHECK(out.regime == "counting-only");
    int mapped = 0;
    for (int i = 0; i < p.n; ++i) {
      const int j = out.final_mapping[static_cast<std::size_t>(i)];
      if (j >= 0) {
        ++mapped;
        CHECK(out.partial.map.at(i) == j);
      }
    }
    CHECK(mapped == static_cast<int>(out.partial.matched.size()));
    if (mapped < p.n) CHECK_FALSE(out.metrics.exact);
  }

  SUBCASE("regime-3 parameters dispatch to the bipartite MAP") {
    ModelParams p{60, 150, 0.01, 0.0, 0.2, 0.9};
    const auto pair = generate_pair(p, 12);
    const auto out = run_pipeline(pair, 2, 0.5, PipelineMode::Auto);
    CHECK(out.regime == "bipartite");
  }

  SUBCASE("dense user graph dispatches to counting plus refinement") {
    ModelParams p{30, 5, 0.4, 0.9, 0.4, 0.9};
    const auto out = run_pipeline(generate_pair(p, 3), 2, 0.5, PipelineMode::Auto);
    // m q_a rho_a = 1.8 < log 30 = 3.4 -> sparse refinement.
    CHECK(out.regime == "sparse");
    ModelParams rich = p;
    rich.m = 12;  // 12 * 0.36 = 4.3 > log 30, user budget still dominant
    CHECK(run_pipeline(generate_pair(rich, 3), 2, 0.5, PipelineMode::Auto).regime == "rich");
  }
}

TEST_CASE("experiment config") {
  const auto config = experiment_config_from_json(kSmallConfig);
  CHECK(config.n == std::vector<int>{24});
  CHECK(config.trials == 3);
  CHECK(config.base_seed == 5);
  CHECK(config.mode == PipelineMode::Auto);
  CHECK_FALSE(config.record_timings);

  CHECK_THROWS(experiment_config_from_json(R"({"n": [10]})"));  // missing lists
  CHECK_THROWS_WITH_AS(
      experiment_config_from_json(
          R"({"n":[4],"m":[2],"q_u":[0.5],"rho_u":[0.5],"q_a":[0.5],"rho_a":[0.5]})"),
      "experiment config: base_seed is required", std::invalid_argument);
}

TEST_CASE("run_experiment") {
  auto config = experiment_config_from_json(kSmallConfig);

  SUBCASE("byte-identical reruns") {
    const auto first = run_experiment(config);
    const auto second = run_experiment(config);
    CHECK(first.csv == second.csv);
    CHECK(first.aggregates_json == second.aggregates_json);
  }

  SUBCASE("output ordering is by (cell, trial) regardless of jobs") {
    auto threaded = config;
    threaded.jobs = 4;
    CHECK(run_experiment(config).csv == run_experiment(threaded).csv);
  }

  SUBCASE("csv shape") {
    const auto results = run_experiment(config);
    std::istringstream lines(results.csv);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 1 + config.trials + 1);  // header + trials + aggregate
    CHECK(results.csv.rfind("cell,n,m,q_u,rho_u,q_a,rho_a,k,c,mode,regime,seed,", 0) == 0);
    // Timings are zeroed unless requested.
    CHECK(results.csv.find("0.000000,0.000000,0.000000,0.000000,0") != std::string::npos);
  }

  SUBCASE("grid expansion covers the cartesian product") {
    auto grid = config;
    grid.rho_u = {0.2, 0.9};
    grid.m = {6, 10};
    grid.trials = 1;
    const auto results = run_experiment(grid);
    CHECK(results.aggregates.size() == 4);
    CHECK(results.trials.size() == 4);
    CHECK(results.trials[0].params.m == 6);
    CHECK(results.trials[3].params.rho_u == 0.9);
    CHECK(results.trials[0].condition_summary == results.aggregates[0].condition_summary);
    CHECK(results.trials[0].condition_summary.find("/8") != std::string::npos);
    CHECK(results.aggregates_json.find("\"conditions\"") != std::string::npos);
  }

  SUBCASE("files are written when paths are set") {
    auto writing = config;
    writing.csv_path = "/tmp/aga_test_results.csv";
    writing.json_path = "/tmp/aga_test_results.json";
    const auto results = run_experiment(writing);
    std::ifstream csv(writing.csv_path);
    std::stringstream buffer;
    buffer << csv.rdbuf();
    CHECK(buffer.str() == results.csv);
    std::remove(writing.csv_path.c_str());
    std::remove(writing.json_path.c_str());
  }

  SUBCASE("unwritable output path is an error") {
    auto writing = config;
    writing.csv_path = "/nonexistent-dir/results.csv";
    CHECK_THROWS_AS(run_experiment(writing), std::runtime_error);
  }
}
