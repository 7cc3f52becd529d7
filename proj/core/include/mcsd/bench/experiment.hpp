#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcsd/engine/engine_config.hpp"
#include "mcsd/engine/session.hpp"
#include "mcsd/model/language_model.hpp"

namespace mcsd {

/// Ideal time = target calls + c * draft calls + d * decision calls.
struct CostModel {
  double c = 0.1;
  double d = 0.05;
};

struct ExperimentSpec {
  std::string dataset = "synthetic";
  std::shared_ptr<const LanguageModel> draft;
  std::shared_ptr<const LanguageModel> target;
  std::vector<Method> methods;
  std::vector<double> temperatures{1.0};
  std::vector<std::uint64_t> seeds{0};
  std::vector<TokenSeq> prompts;
  int max_new_tokens = 200;
  CostModel cost;
  SiblingSampling siblings = SiblingSampling::kWithoutReplacement;
  InitSampling init = InitSampling::kWithoutReplacement;
  std::size_t threads = 1;
  bool keep_traces = false;
  bool wall_clock = false;

  /// Throws ConfigError for missing models, methods, seeds or prompts, c <= 0
  /// or d < 0.
  void validate() const;
};

/// One (method, config, temperature) cell aggregated over seeds and prompts.
struct ResultRow {
  std::string dataset;
  std::string method;
  std::string config;
  double temperature = 0.0;
  std::optional<double> alpha;
  double ideal_cost = 0.0;
  double ideal_speedup = 0.0;  // tokens / ideal cost; vanilla is 1
  std::optional<double> speedup_vs_mcsd;
  SessionStats stats;
  std::optional<double> wall_ms;
};

struct SessionTrace {
  std::string method;
  std::string config;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  std::size_t prompt = 0;
  std::vector<StepRecord> records;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;       // canonical order
  std::vector<SessionTrace> traces;  // when keep_traces
};

double ideal_cost(const CallCounts& calls, const CostModel& cost);

/// Runs every (method, temperature, seed, prompt) session. A vanilla cell is
/// added when absent. Rows are sorted by temperature, method, config. Errors
/// are rethrown as ConfigError naming the failing cell.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct GridCell {
  std::string x;
  std::string y;
  double value = 0.0;
};

struct GridResult {
  ResultRow best;
  std::vector<ResultRow> rows;
  std::vector<GridCell> speedup_cells;
  std::vector<GridCell> alpha_cells;
};

/// Evaluates each tree method of `spec.methods` (at the first temperature).
/// Best = highest ideal speedup, then higher alpha, then smaller config
/// string. Throws ConfigError with fewer than one tree method.
GridResult grid_search(const ExperimentSpec& spec);

/// The grid winner among `rows` by the rule above. Throws ArgumentError when
/// empty.
ResultRow best_grid_row(const std::vector<ResultRow>& rows);

/// Heatmap axes of a tree config: fork gives (W, D); expansion gives (first
/// entry, the rest).
std::pair<std::string, std::string> grid_axes(const TreeConfig& config);

struct SweepPoint {
  int width = 0;
  std::optional<double> alpha;
  double ideal_speedup = 0.0;
};

/// Fork(W, depth) for each width, draft-initialized.
std::vector<SweepPoint> width_sweep(const ExperimentSpec& spec, int depth, const std::vector<int>& widths);

struct AblationRow {
  ResultRow off;
  ResultRow on;
  std::int64_t delta_draft_calls = 0;
  double delta_alpha = 0.0;
  double delta_speedup = 0.0;
};

/// Static fork tree vs the same tree with the decision model, common seeds.
std::vector<AblationRow> ablation_decision_model(const ExperimentSpec& spec, const TreeConfig& tree,
                                                 std::shared_ptr<const DecisionModel> decision, double beta);

}  // namespace mcsd
