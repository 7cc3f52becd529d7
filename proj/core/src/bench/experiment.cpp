#include "mcsd/bench/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <thread>

#include "mcsd/error.hpp"

namespace mcsd {

void ExperimentSpec::validate() const {
  if (!draft || !target) throw ConfigError("experiment needs a draft and a target model");
  if (methods.empty()) throw ConfigError("experiment needs at least one method");
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (temperatures.empty()) throw ConfigError("experiment needs at least one temperature");
  if (prompts.empty()) throw ConfigError("experiment needs at least one prompt");
  if (!(cost.c > 0.0)) throw ConfigError(fmt::format("cost constant c must be positive, got {}", cost.c));
  if (cost.d < 0.0) throw ConfigError(fmt::format("cost constant d must be non-negative, got {}", cost.d));
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be positive");
  for (const auto& m : methods) validate_method(m);
}

double ideal_cost(const CallCounts& calls, const CostModel& cost) {
  return static_cast<double>(calls.target) + cost.c * static_cast<double>(calls.draft) +
         cost.d * static_cast<double>(calls.decision);
}

namespace {

struct Session {
  std::size_t cell;
  double temperature;
  std::uint64_t seed;
  std::size_t prompt;
};

struct SessionOutput {
  SessionStats stats;
  std::vector<StepRecord> trace;
  double wall_ms = 0.0;
};

void run_sessions(const ExperimentSpec& spec, const std::vector<Method>& methods, const std::vector<Session>& sessions,
                  std::vector<SessionOutput>& outputs) {
  auto work = [&](std::size_t i) {
    const Session& s = sessions[i];
    EngineConfig config;
    config.method = methods[s.cell];
    config.temperature = s.temperature;
    config.max_new_tokens = spec.max_new_tokens;
    config.seed = session_seed(s.seed, s.prompt);
    config.siblings = spec.siblings;
    config.init = spec.init;
    const auto start = std::chrono::steady_clock::now();
    try {
      GenerationResult r = run_generation(config, *spec.draft, *spec.target, spec.prompts[s.prompt]);
      outputs[i].stats = std::move(r.stats);
      if (spec.keep_traces) outputs[i].trace = std::move(r.trace);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("cell method={} config={} temperature={} seed={} prompt={} failed: {}",
                                    method_name(config.method), method_config(config.method), s.temperature, s.seed,
                                    s.prompt, e.what()));
    }
    outputs[i].wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(spec.threads, sessions.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < sessions.size(); ++i) work(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < sessions.size(); i += threads) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool row_less(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.temperature, a.method, a.config) < std::tie(b.temperature, b.method, b.config);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<Method> methods = spec.methods;
  if (std::none_of(methods.begin(), methods.end(),
                   [](const Method& m) { return std::holds_alternative<VanillaMethod>(m); })) {
    methods.insert(methods.begin(), VanillaMethod{});
  }

  std::vector<Session> sessions;
  for (std::size_t cell = 0; cell < methods.size(); ++cell) {
    for (double temperature : spec.temperatures) {
      for (std::uint64_t seed : spec.seeds) {
        for (std::size_t p = 0; p < spec.prompts.size(); ++p) sessions.push_back({cell, temperature, seed, p});
      }
    }
  }
  std::vector<SessionOutput> outputs(sessions.size());
  run_sessions(spec, methods, sessions, outputs);

  ExperimentResult result;
  std::map<std::pair<std::size_t, double>, std::size_t> row_of;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const Session& s = sessions[i];
    auto [it, fresh] = row_of.try_emplace({s.cell, s.temperature}, result.rows.size());
    if (fresh) {
      ResultRow row;
      row.dataset = spec.dataset;
      row.method = method_name(methods[s.cell]);
      row.config = method_config(methods[s.cell]);
      row.temperature = s.temperature;
      if (spec.wall_clock) row.wall_ms = 0.0;
      result.rows.push_back(std::move(row));
    }
    ResultRow& row = result.rows[it->second];
    row.stats += outputs[i].stats;
    if (row.wall_ms) *row.wall_ms += outputs[i].wall_ms;
    if (spec.keep_traces) {
      result.traces.push_back({row.method, row.config, s.temperature, s.seed, s.prompt, std::move(outputs[i].trace)});
    }
  }
  for (ResultRow& row : result.rows) {
    row.alpha = row.stats.alpha();
    row.ideal_cost = ideal_cost(row.stats.calls, spec.cost);
    row.ideal_speedup = row.ideal_cost > 0.0 ? static_cast<double>(row.stats.total_emitted) / row.ideal_cost : 0.0;
  }
  std::sort(result.rows.begin(), result.rows.end(), row_less);
  for (ResultRow& row : result.rows) {
    const auto mcsd = std::find_if(result.rows.begin(), result.rows.end(), [&](const ResultRow& r) {
      return r.method == "mcsd" && r.temperature == row.temperature;
    });
    if (mcsd != result.rows.end() && mcsd->ideal_speedup > 0.0)
      row.speedup_vs_mcsd = row.ideal_speedup / mcsd->ideal_speedup;
  }
  return result;
}

std::pair<std::string, std::string> grid_axes(const TreeConfig& config) {
  if (const auto* f = std::get_if<ForkShape>(&config.shape)) {
    return {fmt::format("{}", f->width), fmt::format("{}", f->depth)};
  }
  const auto& b = std::get<ExpansionShape>(config.shape).branching;
  std::string rest;
  for (std::size_t i = 1; i < b.size(); ++i) rest += fmt::format("{}{}", i > 1 ? "," : "", b[i]);
  return {fmt::format("{}", b.front()), rest.empty() ? "-" : rest};
}

namespace {

const TreeConfig* tree_config(const Method& m) {
  if (const auto* x = std::get_if<McsdMethod>(&m)) return &x->tree;
  if (const auto* x = std::get_if<TargetInitMethod>(&m)) return &x->tree;
  if (const auto* x = std::get_if<DynamicMethod>(&m)) return &x->tree;
  return nullptr;
}

bool better_cell(const ResultRow& a, const ResultRow& b) {
  if (a.ideal_speedup != b.ideal_speedup) return a.ideal_speedup > b.ideal_speedup;
  const double aa = a.alpha.value_or(-1.0);
  const double ba = b.alpha.value_or(-1.0);
  if (aa != ba) return aa > ba;
  return a.config < b.config;
}

}  // namespace

GridResult grid_search(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.temperatures.resize(1);
  std::vector<Method> trees;
  for (const auto& m : spec.methods) {
    if (tree_config(m)) trees.push_back(m);
  }
  if (trees.empty()) throw ConfigError("grid search needs at least one tree configuration");
  s.methods = trees;
  ExperimentResult r = run_experiment(s);

  GridResult grid;
  for (const auto& m : trees) {
    const std::string name = method_name(m);
    const std::string config = method_config(m);
    const auto row = std::find_if(r.rows.begin(), r.rows.end(),
                                  [&](const ResultRow& x) { return x.method == name && x.config == config; });
    const auto [x, y] = grid_axes(*tree_config(m));
    grid.speedup_cells.push_back({x, y, row->ideal_speedup});
    grid.alpha_cells.push_back({x, y, row->alpha.value_or(0.0)});
  }
  for (const auto& row : r.rows) {
    if (row.method == "vanilla") continue;
    grid.rows.push_back(row);
  }
  grid.best = best_grid_row(grid.rows);
  return grid;
}

ResultRow best_grid_row(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw ArgumentError("no grid rows to choose from");
  return *std::min_element(rows.begin(), rows.end(), better_cell);
}

std::vector<SweepPoint> width_sweep(const ExperimentSpec& spec, int depth, const std::vector<int>& widths) {
  if (widths.empty()) throw ConfigError("width sweep needs at least one width");
  ExperimentSpec s = spec;
  s.temperatures.resize(1);
  s.methods.clear();
  for (int w : widths) s.methods.push_back(McsdMethod{TreeConfig::fork(w, depth)});
  const ExperimentResult r = run_experiment(s);
  std::vector<SweepPoint> out;
  for (int w : widths) {
    const std::string config = TreeConfig::fork(w, depth).to_string();
    const auto row = std::find_if(r.rows.begin(), r.rows.end(),
                                  [&](const ResultRow& x) { return x.method == "mcsd" && x.config == config; });
    out.push_back({w, row->alpha, row->ideal_speedup});
  }
  return out;
}

std::vector<AblationRow> ablation_decision_model(const ExperimentSpec& spec, const TreeConfig& tree,
                                                 std::shared_ptr<const DecisionModel> decision, double beta) {
  if (!tree.is_fork()) throw ConfigError("decision-model ablation needs a fork tree");
  ExperimentSpec s = spec;
  const Method off = tree.target_initialized() ? Method(TargetInitMethod{tree}) : Method(McsdMethod{tree});
  s.methods = {off, DynamicMethod{tree, std::move(decision), beta}};
  const ExperimentResult r = run_experiment(s);
  std::vector<AblationRow> out;
  for (double t : s.temperatures) {
    AblationRow a;
    for (const auto& row : r.rows) {
      if (row.temperature != t) continue;
      if (row.method == "dynamic") a.on = row;
      if (row.method == method_name(off)) a.off = row;
    }
    a.delta_draft_calls =
        static_cast<std::int64_t>(a.on.stats.calls.draft) - static_cast<std::int64_t>(a.off.stats.calls.draft);
    a.delta_alpha = a.on.alpha.value_or(0.0) - a.off.alpha.value_or(0.0);
    a.delta_speedup = a.on.ideal_speedup - a.off.ideal_speedup;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace mcsd
