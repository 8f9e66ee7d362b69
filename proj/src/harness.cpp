#include "aga/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "aga/analysis.hpp"
#include "aga/bipartite.hpp"

namespace aga {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_param(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

PipelineMode pipeline_mode_from_string(const std::string& name) {
  if (name == "counting-only") return PipelineMode::CountingOnly;
  if (name == "counting+sparse") return PipelineMode::CountingSparse;
  if (name == "counting+rich") return PipelineMode::CountingRich;
  if (name == "bipartite-map") return PipelineMode::BipartiteMap;
  if (name == "auto") return PipelineMode::Auto;
  throw std::invalid_argument("unknown pipeline mode: " + name);
}

const char* pipeline_mode_name(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::CountingOnly: return "counting-only";
    case PipelineMode::CountingSparse: return "counting+sparse";
    case PipelineMode::CountingRich: return "counting+rich";
    case PipelineMode::BipartiteMap: return "bipartite-map";
    case PipelineMode::Auto: return "auto";
  }
  throw std::logic_error("pipeline_mode_name");
}

Metrics compute_metrics(const PartialAlignment& partial, const std::vector<int>& final_mapping,
                        const Permutation& truth) {
  const int n = truth.size();
  if (static_cast<int>(final_mapping.size()) != n)
    throw std::invalid_argument("compute_metrics: mapping size mismatch");

  Metrics metrics;
  if (partial.matched.empty()) {
    metrics.precision_on_matched = 1.0;  // vacuous
  } else {
    int correct = 0;
    for (int i : partial.matched)
      if (partial.map.at(i) == truth(i)) ++correct;
    metrics.precision_on_matched =
        static_cast<double>(correct) / static_cast<double>(partial.matched.size());
  }
  metrics.coverage = static_cast<double>(partial.matched.size()) / static_cast<double>(n);

  int correct_final = 0;
  for (int i = 0; i < n; ++i)
    if (final_mapping[static_cast<std::size_t>(i)] == truth(i)) ++correct_final;
  metrics.final_accuracy = static_cast<double>(correct_final) / static_cast<double>(n);
  metrics.exact = correct_final == n;
  return metrics;
}

PipelineOutput run_pipeline(const AttributedGraphPair& pair, int k, double c, PipelineMode mode,
                            double epsilon) {
  const ModelParams& params = pair.params;
  params.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("run_pipeline: epsilon must be > 0");

  PipelineOutput out;
  const auto total_start = std::chrono::steady_clock::now();

  if (mode == PipelineMode::Auto) {
    const double budget = (1.0 + epsilon) * std::log(static_cast<double>(params.n));
    const double attr_budget = params.m * params.q_a * params.s_a();
    const double user_budget = params.n * params.q_u * params.s_u();
    if (attr_budget >= budget && user_budget < budget)
      mode = PipelineMode::BipartiteMap;
    else
      mode = select_regime(params) == Regime::AttrRich ? PipelineMode::CountingRich
                                                       : PipelineMode::CountingSparse;
  }

  if (mode == PipelineMode::BipartiteMap) {
    const auto start = std::chrono::steady_clock::now();
    const Permutation estimate = align_bipartite_map(pair);
    out.metrics.t_align = seconds_since(start);
    out.final_mapping = estimate.images();
    out.regime = "bipartite";
  } else {
    const auto align_start = std::chrono::steady_clock::now();
    out.partial = align_by_counting(pair, k, c);
    const double t_align = seconds_since(align_start);

    if (mode == PipelineMode::CountingOnly) {
      out.final_mapping.assign(static_cast<std::size_t>(params.n), -1);
      for (const auto& [i, j] : out.partial.map) out.final_mapping[static_cast<std::size_t>(i)] = j;
      out.regime = "counting-only";
    } else {
      const RefineThresholds thresholds = compute_refine_thresholds(params);
      const auto refine_start = std::chrono::steady_clock::now();
      RefineResult refined;
      if (mode == PipelineMode::CountingSparse) {
        refined = refine_attr_sparse(pair, out.partial, thresholds.gamma1);
        out.regime = "sparse";
      } else {
        refined = refine_attr_rich(pair, out.partial, thresholds.gamma2, thresholds.gamma3);
        out.regime = "rich";
      }
      out.metrics.t_refine = seconds_since(refine_start);
      out.final_mapping = std::move(refined.mapping);
    }
    out.metrics.t_align = t_align;
  }

  const Metrics scores = compute_metrics(out.partial, out.final_mapping, pair.truth);
  out.metrics.precision_on_matched = scores.precision_on_matched;
  out.metrics.coverage = scores.coverage;
  out.metrics.final_accuracy = scores.final_accuracy;
  out.metrics.exact = scores.exact;
  out.metrics.t_total = seconds_since(total_start);
  return out;
}

void ExperimentConfig::validate() const {
  if (n.empty() || m.empty() || q_u.empty() || rho_u.empty() || q_a.empty() || rho_a.empty())
    throw std::invalid_argument("ExperimentConfig: every parameter list must be non-empty");
  if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  if (k < 1) throw std::invalid_argument("ExperimentConfig: k must be >= 1");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("ExperimentConfig: c out of (0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("ExperimentConfig: epsilon must be > 0");
  if (jobs < 1) throw std::invalid_argument("ExperimentConfig: jobs must be >= 1");
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentConfig config;
  config.n = j.at("n").get<std::vector<int>>();
  config.m = j.at("m").get<std::vector<int>>();
  config.q_u = j.at("q_u").get<std::vector<double>>();
  config.rho_u = j.at("rho_u").get<std::vector<double>>();
  config.q_a = j.at("q_a").get<std::vector<double>>();
  config.rho_a = j.at("rho_a").get<std::vector<double>>();
  config.k = j.value("k", config.k);
  config.c = j.value("c", config.c);
  config.trials = j.value("trials", config.trials);
  if (!j.contains("base_seed"))
    throw std::invalid_argument("experiment config: base_seed is required");
  config.base_seed = j.at("base_seed").get<std::uint64_t>();
  config.mode = pipeline_mode_from_string(j.value("mode", "auto"));
  config.epsilon = j.value("epsilon", config.epsilon);
  config.csv_path = j.value("csv_path", config.csv_path);
  config.json_path = j.value("json_path", config.json_path);
  config.jobs = j.value("jobs", config.jobs);
  config.record_timings = j.value("record_timings", config.record_timings);
  config.validate();
  return config;
}

namespace {

std::vector<ModelParams> expand_grid(const ExperimentConfig& config) {
  std::vector<ModelParams> cells;
  for (int n : config.n)
    for (int m : config.m)
      for (double q_u : config.q_u)
        for (double rho_u : config.rho_u)
          for (double q_a : config.q_a)
            for (double rho_a : config.rho_a)
              cells.push_back(ModelParams{n, m, q_u, rho_u, q_a, rho_a});
  return cells;
}

constexpr char kCsvHeader[] =
    "cell,n,m,q_u,rho_u,q_a,rho_a,k,c,mode,regime,seed,precision,coverage,accuracy,exact,"
    "t_gen,t_align,t_refine,t_total,aggregate\n";

void append_params(std::string& csv, int cell, const ModelParams& p, int k, double c,
                   const std::string& mode) {
  csv += std::to_string(cell);
  csv += ',' + std::to_string(p.n) + ',' + std::to_string(p.m);
  csv += ',' + format_param(p.q_u) + ',' + format_param(p.rho_u);
  csv += ',' + format_param(p.q_a) + ',' + format_param(p.rho_a);
  csv += ',' + std::to_string(k) + ',' + format_param(c) + ',' + mode;
}

}  // namespace

ExperimentResults run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::vector<ModelParams> cells = expand_grid(config);
  const int num_cells = static_cast<int>(cells.size());
  const int trials = config.trials;
  const int total = num_cells * trials;

  // Finite-sample condition verdicts are a function of the cell parameters.
  std::vector<std::string> condition_summaries(static_cast<std::size_t>(num_cells));
  for (int cell = 0; cell < num_cells; ++cell) {
    const ConditionReport report =
        check_conditions(cells[static_cast<std::size_t>(cell)], config.k, config.epsilon);
    const bool verdicts[] = {report.almost_degree,     report.almost_attr_correlation,
                             report.almost_user_correlation, report.almost_attr_info_1,
                             report.almost_attr_info_2, report.exact_degree,
                             report.exact_user_ratio,  report.exact_attr_ratio};
    int passed = 0;
    for (bool verdict : verdicts) passed += verdict;
    condition_summaries[static_cast<std::size_t>(cell)] =
        std::to_string(passed) + "/" + std::to_string(std::size(verdicts));
  }

  // Child seeds, checked for collisions across the whole grid.
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(total));
  {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(seeds.size());
    for (int cell = 0; cell < num_cells; ++cell)
      for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed = Rng::derive_seed(
            config.base_seed, static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(t));
        seeds[static_cast<std::size_t>(cell * trials + t)] = seed;
        if (!seen.insert(seed).second)
          throw std::runtime_error("run_experiment: child seed collision");
      }
  }

  ExperimentResults results;
  results.trials.resize(static_cast<std::size_t>(total));
  auto run_one = [&](int index) {
    const int cell = index / trials;
    const ModelParams& params = cells[static_cast<std::size_t>(cell)];
    TrialResult& trial = results.trials[static_cast<std::size_t>(index)];
    trial.cell = cell;
    trial.params = params;
    trial.seed = seeds[static_cast<std::size_t>(index)];
    trial.condition_summary = condition_summaries[static_cast<std::size_t>(cell)];

    const auto gen_start = std::chrono::steady_clock::now();
    const AttributedGraphPair pair = generate_pair(params, trial.seed);
    const double t_gen = seconds_since(gen_start);

    PipelineOutput out = run_pipeline(pair, config.k, config.c, config.mode, config.epsilon);
    trial.metrics = out.metrics;
    trial.metrics.t_gen = t_gen;
    trial.metrics.t_total += t_gen;
    trial.regime = out.regime;
  };

  if (config.jobs == 1) {
    for (int index = 0; index < total; ++index) run_one(index);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int jobs = std::min(config.jobs, total);
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (int index = next.fetch_add(1); index < total; index = next.fetch_add(1))
          run_one(index);
      });
    for (auto& worker : workers) worker.join();
  }

  // Per-cell aggregates.
  results.aggregates.resize(static_cast<std::size_t>(num_cells));
  for (int cell = 0; cell < num_cells; ++cell) {
    CellAggregate& agg = results.aggregates[static_cast<std::size_t>(cell)];
    agg.cell = cell;
    agg.params = cells[static_cast<std::size_t>(cell)];
    agg.trials = trials;
    agg.condition_summary = condition_summaries[static_cast<std::size_t>(cell)];
    for (int t = 0; t < trials; ++t) {
      const Metrics& m = results.trials[static_cast<std::size_t>(cell * trials + t)].metrics;
      agg.mean_precision += m.precision_on_matched;
      agg.mean_coverage += m.coverage;
      agg.mean_accuracy += m.final_accuracy;
      agg.exact_rate += m.exact ? 1.0 : 0.0;
      agg.mean_timings.t_gen += m.t_gen;
      agg.mean_timings.t_align += m.t_align;
      agg.mean_timings.t_refine += m.t_refine;
      agg.mean_timings.t_total += m.t_total;
    }
    const double inv = 1.0 / static_cast<double>(trials);
    agg.mean_precision *= inv;
    agg.mean_coverage *= inv;
    agg.mean_accuracy *= inv;
    agg.exact_rate *= inv;
    agg.mean_timings.t_gen *= inv;
    agg.mean_timings.t_align *= inv;
    agg.mean_timings.t_refine *= inv;
    agg.mean_timings.t_total *= inv;
  }

  // CSV rendering: trial rows per cell followed by the cell's aggregate row.
  const std::string mode = pipeline_mode_name(config.mode);
  auto timing_or_zero = [&](double t) { return config.record_timings ? t : 0.0; };
  results.csv = kCsvHeader;
  for (int cell = 0; cell < num_cells; ++cell) {
    for (int t = 0; t < trials; ++t) {
      const TrialResult& trial = results.trials[static_cast<std::size_t>(cell * trials + t)];
      append_params(results.csv, cell, trial.params, config.k, config.c, mode);
      results.csv += ',' + trial.regime;
      results.csv += ',' + std::to_string(trial.seed);
      results.csv += ',' + format_fixed(trial.metrics.precision_on_matched);
      results.csv += ',' + format_fixed(trial.metrics.coverage);
      results.csv += ',' + format_fixed(trial.metrics.final_accuracy);
      results.csv += trial.metrics.exact ? ",1" : ",0";
      results.csv += ',' + format_fixed(timing_or_zero(trial.metrics.t_gen));
      results.csv += ',' + format_fixed(timing_or_zero(trial.metrics.t_align));
      results.csv += ',' + format_fixed(timing_or_zero(trial.metrics.t_refine));
      results.csv += ',' + format_fixed(timing_or_zero(trial.metrics.t_total));
      results.csv += ",0\n";
    }
    const CellAggregate& agg = results.aggregates[static_cast<std::size_t>(cell)];
    append_params(results.csv, cell, agg.params, config.k, config.c, mode);
    results.csv += ",,";  // regime and seed are per-trial quantities
    results.csv += ',' + format_fixed(agg.mean_precision);
    results.csv += ',' + format_fixed(agg.mean_coverage);
    results.csv += ',' + format_fixed(agg.mean_accuracy);
    results.csv += ',' + format_fixed(agg.exact_rate);
    results.csv += ',' + format_fixed(timing_or_zero(agg.mean_timings.t_gen));
    results.csv += ',' + format_fixed(timing_or_zero(agg.mean_timings.t_align));
    results.csv += ',' + format_fixed(timing_or_zero(agg.mean_timings.t_refine));
    results.csv += ',' + format_fixed(timing_or_zero(agg.mean_timings.t_total));
    results.csv += ",1\n";
  }

  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["k"] = config.k;
  j["c"] = config.c;
  j["trials_per_cell"] = trials;
  auto& cells_json = j["cells"] = nlohmann::ordered_json::array();
  for (const CellAggregate& agg : results.aggregates) {
    nlohmann::ordered_json cj;
    cj["cell"] = agg.cell;
    cj["n"] = agg.params.n;
    cj["m"] = agg.params.m;
    cj["q_u"] = agg.params.q_u;
    cj["rho_u"] = agg.params.rho_u;
    cj["q_a"] = agg.params.q_a;
    cj["rho_a"] = agg.params.rho_a;
    cj["conditions"] = agg.condition_summary;
    cj["mean_precision"] = agg.mean_precision;
    cj["mean_coverage"] = agg.mean_coverage;
    cj["mean_accuracy"] = agg.mean_accuracy;
    cj["exact_rate"] = agg.exact_rate;
    cells_json.push_back(std::move(cj));
  }
  results.aggregates_json = j.dump(2);

  if (!config.csv_path.empty()) {
    std::ofstream out(config.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("run_experiment: cannot write " + config.csv_path);
    out << results.csv;
  }
  if (!config.json_path.empty()) {
    std::ofstream out(config.json_path, std::ios::binary);
    if (!out) throw std::runtime_error("run_experiment: cannot write " + config.json_path);
    out << results.aggregates_json << '\n';
  }
  return results;
}

}  // namespace aga
