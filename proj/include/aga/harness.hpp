#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aga/counting.hpp"
#include "aga/model.hpp"
#include "aga/refine.hpp"

namespace aga {

enum class PipelineMode { CountingOnly, CountingSparse, CountingRich, BipartiteMap, Auto };

PipelineMode pipeline_mode_from_string(const std::string& name);
const char* pipeline_mode_name(PipelineMode mode);

struct Metrics {
  double precision_on_matched = 1.0;  // fraction of matched users mapped correctly (1 on empty)
  double coverage = 0.0;              // |matched| / n
  double final_accuracy = 0.0;        // fraction of all users correct in the final mapping
  bool exact = false;                 // final mapping equals the truth pointwise
  double t_gen = 0.0;                 // seconds; filled by the caller that generated the pair
  double t_align = 0.0;
  double t_refine = 0.0;
  double t_total = 0.0;
};

Metrics compute_metrics(const PartialAlignment& partial, const std::vector<int>& final_mapping,
                        const Permutation& truth);

struct PipelineOutput {
  PartialAlignment partial;
  std::vector<int> final_mapping;  // length n, -1 where unmatched
  Metrics metrics;
  std::string regime;  // "counting-only", "sparse", "rich" or "bipartite"
};

// End-to-end run on one pair. Mode Auto dispatches on the exact-recovery
// budget split: attribute-only MAP when m q_a s_a >= (1+eps) log n while
// n q_u s_u < (1+eps) log n, otherwise counting alignment followed by the
// refinement matching select_regime. Refinement multipliers come from
// compute_refine_thresholds.
PipelineOutput run_pipeline(const AttributedGraphPair& pair, int k, double c, PipelineMode mode,
                            double epsilon = 0.1);

// Grid experiment: the cartesian product of the per-parameter lists (in the
// listed order: n, m, q_u, rho_u, q_a, rho_a) defines the cells; each cell
// runs `trials` independently seeded trials.
struct ExperimentConfig {
  std::vector<int> n;
  std::vector<int> m;
  std::vector<double> q_u;
  std::vector<double> rho_u;
  std::vector<double> q_a;
  std::vector<double> rho_a;
  int k = 2;
  double c = 0.5;
  int trials = 1;
  std::uint64_t base_seed = 0;
  PipelineMode mode = PipelineMode::Auto;
  double epsilon = 0.1;
  std::string csv_path;   // empty: keep in memory only
  std::string json_path;  // empty: keep in memory only
  int jobs = 1;
  // Wallclock columns are emitted as 0 unless enabled; with timings off the
  // output bytes are a pure function of (config, base_seed).
  bool record_timings = false;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);

struct TrialResult {
  int cell = 0;
  ModelParams params;
  std::uint64_t seed = 0;
  std::string regime;
  std::string condition_summary;  // "passed/total" finite-sample verdicts for the cell
  Metrics metrics;
};

struct CellAggregate {
  int cell = 0;
  ModelParams params;
  int trials = 0;
  std::string condition_summary;
  double mean_precision = 0.0;
  double mean_coverage = 0.0;
  double mean_accuracy = 0.0;
  double exact_rate = 0.0;
  Metrics mean_timings;
};

struct ExperimentResults {
  std::vector<TrialResult> trials;       // ordered by (cell, trial)
  std::vector<CellAggregate> aggregates; // ordered by cell
  std::string csv;                       // full result table
  std::string aggregates_json;
};

// Runs the whole grid (trials execute concurrently when jobs > 1; output
// order is by (cell, trial) index regardless of completion order), renders
// the CSV/JSON artifacts and writes them when paths are configured. Child
// seeds are derived per (cell, trial) and checked for collisions.
ExperimentResults run_experiment(const ExperimentConfig& config);

}  // namespace aga
