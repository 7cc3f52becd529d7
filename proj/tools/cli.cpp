#include "cli.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "mcsd/bench/experiment.hpp"
#include "mcsd/bench/model_spec.hpp"
#include "mcsd/bench/plots.hpp"
#include "mcsd/bench/prompts.hpp"
#include "mcsd/decision/training.hpp"
#include "mcsd/engine/oracle.hpp"
#include "mcsd/engine/trace.hpp"
#include "mcsd/error.hpp"

namespace mcsd {

namespace {

namespace fs = std::filesystem;

constexpr const char* kDefaultTarget = "synth:vocab=32,order=1,sharpness=2.5,seed=1";
constexpr const char* kOracleTarget = "synth:vocab=4,order=1,sharpness=1.5,seed=1";

struct Options {
  std::string target = kDefaultTarget;
  std::string draft = "smooth:tau=1.5";
  std::vector<std::string> methods;
  std::vector<std::string> trees;
  std::vector<double> temperatures{0.7};
  int gamma = 4;
  double beta = kDefaultStopThreshold;
  std::vector<std::uint64_t> seeds{0};
  int max_new_tokens = 200;
  double cost_c = 0.1;
  double cost_d = 0.05;
  std::string prompts;
  std::size_t n_prompts = 0;
  std::size_t prompt_len = 8;
  std::string out;
  std::string dataset = "synthetic";
  std::string decision = "const:1";
  std::string siblings = "without";
  std::string init = "sample";
  std::size_t threads = 1;
  bool trace = false;
  bool wall_clock = false;

  // grid / sweep
  std::vector<int> widths;
  std::vector<int> depths;
  int depth = 5;

  // train-decision
  std::string kind = "t2";
  std::string label = "min";
  int epochs = 30;
  double lr = 0.5;
  std::size_t top_k = DecisionT2::kDefaultTopK;
  bool no_balance = false;

  // oracle-check
  std::vector<TokenId> prefix{0};
  std::size_t length = 1;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--target", o.target, "Target model descriptor or table path");
  app->add_option("--draft", o.draft, "Draft model descriptor or table path");
  app->add_option("--method", o.methods, "Methods: vanilla, sd, mcsd, tinit, dynamic")->delimiter(',');
  app->add_option("--tree", o.trees, "Tree config, e.g. 2,4,3,1,1 or fork:W=16,D=5 (repeatable)");
  app->add_option("--temperature", o.temperatures, "Sampling temperatures")->delimiter(',');
  app->add_option("--gamma", o.gamma, "Draft length of baseline SD");
  app->add_option("--beta", o.beta, "Early-stop threshold");
  app->add_option("--seed", o.seeds, "Seeds")->delimiter(',');
  app->add_option("--max-new-tokens", o.max_new_tokens, "Tokens generated per prompt");
  app->add_option("--cost-c", o.cost_c, "Draft/target cost ratio");
  app->add_option("--cost-d", o.cost_d, "Decision/target cost ratio");
  app->add_option("--prompts", o.prompts, "Prompt file: id lines or records with a \"prompt\" field");
  app->add_option("--n-prompts", o.n_prompts, "Prompt count (subsample, or synthetic count)");
  app->add_option("--prompt-len", o.prompt_len, "Length of synthetic prompts");
  app->add_option("--out", o.out, "Output directory (default $MCSD_BENCH_OUT or bench_out)");
  app->add_option("--dataset", o.dataset, "Dataset tag for result rows");
  app->add_option("--decision", o.decision, "Decision model weights, or const:<score>");
  app->add_option("--siblings", o.siblings, "Sibling sampling: without | with")
      ->check(CLI::IsMember({"without", "with"}));
  app->add_option("--init", o.init, "Target-init sampling: sample | greedy")
      ->check(CLI::IsMember({"sample", "greedy"}));
  app->add_option("--threads", o.threads, "Sessions run in parallel");
  app->add_flag("--trace", o.trace, "Write per-step trace.jsonl");
  app->add_flag("--wall-clock", o.wall_clock, "Add a wall_ms column (not reproducible)");
}

fs::path out_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("MCSD_BENCH_OUT"); env && *env) return env;
  return "bench_out";
}

std::shared_ptr<const DecisionModel> load_decision(const std::string& spec) {
  if (spec.rfind("const:", 0) == 0) {
    const double v = std::stod(spec.substr(6));
    return std::make_shared<DecisionModel>(DecisionModel::constant(v));
  }
  return std::make_shared<DecisionModel>(DecisionModel::load(spec));
}

std::vector<Method> build_methods(const Options& o, const std::vector<std::string>& fallback) {
  const auto& names = o.methods.empty() ? fallback : o.methods;
  std::vector<Method> out;
  auto trees_for = [&](const std::string& dflt, bool target_init) {
    std::vector<TreeConfig> trees;
    if (o.trees.empty()) {
      trees.push_back(parse_tree_config(dflt, target_init));
    } else {
      for (const auto& t : o.trees) trees.push_back(parse_tree_config(t, target_init));
    }
    return trees;
  };
  for (const auto& name : names) {
    if (name == "vanilla") {
      out.emplace_back(VanillaMethod{});
    } else if (name == "sd") {
      out.emplace_back(BaselineSdMethod{o.gamma});
    } else if (name == "mcsd") {
      for (auto& t : trees_for("4,2,2,1", false)) out.emplace_back(McsdMethod{t});
    } else if (name == "tinit") {
      for (auto& t : trees_for("2,4,3,1,1", true)) out.emplace_back(TargetInitMethod{t});
    } else if (name == "dynamic") {
      const auto decision = load_decision(o.decision);
      for (auto& t : trees_for("fork:W=16,D=5", false)) out.emplace_back(DynamicMethod{t, decision, o.beta});
    } else {
      throw ConfigError(fmt::format("unknown method '{}'", name));
    }
  }
  for (const auto& m : out) validate_method(m);
  return out;
}

ExperimentSpec build_spec(const Options& o, const ModelPair& models, std::ostream& err) {
  ExperimentSpec spec;
  spec.dataset = o.dataset;
  spec.draft = models.draft;
  spec.target = models.target;
  spec.temperatures = o.temperatures;
  spec.seeds = o.seeds;
  spec.max_new_tokens = o.max_new_tokens;
  spec.cost = {o.cost_c, o.cost_d};
  spec.siblings = o.siblings == "with" ? SiblingSampling::kWithReplacement : SiblingSampling::kWithoutReplacement;
  spec.init = o.init == "greedy" ? InitSampling::kGreedy : InitSampling::kWithoutReplacement;
  spec.threads = o.threads;
  spec.keep_traces = o.trace;
  spec.wall_clock = o.wall_clock;
  if (!o.prompts.empty()) {
    spec.prompts = ingest_prompts(o.prompts, PromptFormat::kAuto, models.target->vocab_size());
    if (o.n_prompts > 0) spec.prompts = subsample_prompts(spec.prompts, o.n_prompts, o.seeds.front(), &err);
  } else {
    spec.prompts = synthetic_prompts(*models.target, o.n_prompts > 0 ? o.n_prompts : 20, o.prompt_len, o.seeds.front());
  }
  return spec;
}

void write_traces(const fs::path& path, const std::vector<SessionTrace>& traces) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError(fmt::format("cannot write {}", path.string()));
  for (const auto& t : traces) {
    write_trace(f, t.records,
                {{"config", t.config},
                 {"prompt", std::to_string(t.prompt)},
                 {"seed", std::to_string(t.seed)},
                 {"temperature", format_real(t.temperature)}});
  }
}

void print_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << fmt::format("{:<8} {:<16} {:>6} {:>8} {:>9}\n", "method", "config", "temp", "alpha", "speedup");
  for (const auto& r : rows) {
    out << fmt::format("{:<8} {:<16} {:>6} {:>8} {:>9.4f}\n", r.method, r.config, format_real(r.temperature),
                       r.alpha ? fmt::format("{:.4f}", *r.alpha) : "-", r.ideal_speedup);
  }
}

void cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelPair models = load_model_pair(o.target, o.draft);
  ExperimentSpec spec = build_spec(o, models, err);
  spec.methods = build_methods(o, {"vanilla", "sd", "mcsd", "tinit"});
  const ExperimentResult r = run_experiment(spec);
  const fs::path dir = out_dir(o);
  emit_results(dir / "results.tsv", r.rows);
  emit_bars(dir / "bars.tsv", r.rows);
  if (o.trace) write_traces(dir / "trace.jsonl", r.traces);
  print_rows(out, r.rows);
}

void cmd_grid(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelPair models = load_model_pair(o.target, o.draft);
  ExperimentSpec spec = build_spec(o, models, err);
  Options grid = o;
  if (grid.trees.empty()) {
    const auto widths = o.widths.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8} : o.widths;
    const auto depths = o.depths.empty() ? std::vector<int>{1, 2, 3, 4, 5} : o.depths;
    for (int w : widths) {
      for (int d : depths) grid.trees.push_back(fmt::format("fork:W={},D={}", w, d));
    }
  }
  spec.methods = build_methods(grid, {"mcsd"});
  const GridResult g = grid_search(spec);
  const fs::path dir = out_dir(o);
  emit_results(dir / "grid.tsv", g.rows);
  try {
    emit_heatmap(dir / "heatmap_speedup.tsv", g.speedup_cells);
    emit_heatmap(dir / "heatmap_alpha.tsv", g.alpha_cells);
  } catch (const ArgumentError& e) {
    err << "warning: no heatmap written: " << e.what() << '\n';
  }
  std::ofstream best(dir / "best.txt", std::ios::binary);
  best << fmt::format("{}\t{}\t{}\t{}\n", g.best.method, g.best.config, g.best.alpha ? format_real(*g.best.alpha) : "-",
                      format_real(g.best.ideal_speedup));
  print_rows(out, g.rows);
  out << fmt::format("best: {} {} speedup {:.4f}\n", g.best.method, g.best.config, g.best.ideal_speedup);
}

void cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelPair models = load_model_pair(o.target, o.draft);
  const ExperimentSpec spec = build_spec(o, models, err);
  std::vector<int> widths = o.widths;
  if (widths.empty()) {
    for (int w = 1; w <= 16; ++w) widths.push_back(w);
  }
  const auto points = width_sweep(spec, o.depth, widths);
  std::vector<SeriesPoint> series;
  for (const auto& p : points) series.push_back({"alpha", static_cast<double>(p.width), p.alpha.value_or(0.0)});
  for (const auto& p : points) series.push_back({"speedup", static_cast<double>(p.width), p.ideal_speedup});
  emit_series(out_dir(o) / "sweep.tsv", series);
  out << fmt::format("{:>5} {:>8} {:>9}\n", "W", "alpha", "speedup");
  for (const auto& p : points) {
    out << fmt::format("{:>5} {:>8.4f} {:>9.4f}\n", p.width, p.alpha.value_or(0.0), p.ideal_speedup);
  }
}

void cmd_ablate(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelPair models = load_model_pair(o.target, o.draft);
  const ExperimentSpec spec = build_spec(o, models, err);
  const TreeConfig tree = parse_tree_config(o.trees.empty() ? "fork:W=4,D=4" : o.trees.front());
  const auto rows = ablation_decision_model(spec, tree, load_decision(o.decision), o.beta);
  std::vector<ResultRow> flat;
  std::ostringstream table;
  table << "config\ttemperature\toff_alpha\ton_alpha\toff_draft_calls\ton_draft_calls\tdelta_draft_calls\t"
           "delta_alpha\tdelta_speedup\ton_decision_fires\toff_depth_hist\ton_depth_hist\n";
  auto hist = [](const SessionStats& s) {
    std::string h;
    for (const auto& [d, c] : s.depth_histogram) h += fmt::format("{}{}:{}", h.empty() ? "" : ";", d, c);
    return h.empty() ? std::string("-") : h;
  };
  for (const auto& a : rows) {
    table << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", a.off.config,
                         format_real(a.off.temperature), a.off.alpha ? format_real(*a.off.alpha) : "-",
                         a.on.alpha ? format_real(*a.on.alpha) : "-", a.off.stats.calls.draft, a.on.stats.calls.draft,
                         a.delta_draft_calls, format_real(a.delta_alpha), format_real(a.delta_speedup),
                         a.on.stats.early_stops, hist(a.off.stats), hist(a.on.stats));
    out << fmt::format("T={} delta_draft_calls={} delta_alpha={:.6f} delta_speedup={:.6f}\n",
                       format_real(a.off.temperature), a.delta_draft_calls, a.delta_alpha, a.delta_speedup);
  }
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  std::ofstream(dir / "ablation.tsv", std::ios::binary) << table.str();
}

void cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelPair models = load_model_pair(o.target, o.draft);
  const ExperimentSpec spec = build_spec(o, models, err);
  EngineConfig config;
  config.method = McsdMethod{parse_tree_config(o.trees.empty() ? "fork:W=4,D=4" : o.trees.front())};
  config.temperature = o.temperatures.front();
  config.max_new_tokens = o.max_new_tokens;
  config.seed = o.seeds.front();
  config.siblings = spec.siblings;

  CollectOptions collect;
  collect.features = o.kind == "t1" ? FeatureKind::kHiddenState : FeatureKind::kTopKEntropy;
  collect.top_k = o.top_k;
  collect.ratio = o.label == "paper" ? RatioLabel::kVerbatimMax : RatioLabel::kAcceptanceProbability;
  collect.balance = !o.no_balance;
  collect.label_seed = o.seeds.front();
  const auto samples = collect_training_data(*models.draft, *models.target, spec.prompts, config, collect);
  if (samples.empty()) throw ConfigError("no draft tokens were generated; nothing to train on");

  DecisionModel model = o.kind == "t1"
                            ? DecisionModel(DecisionT1(models.draft->hidden_dim(), o.seeds.front(), collect.ratio))
                            : DecisionModel(DecisionT2(o.top_k, o.seeds.front()));
  if (model.required_hidden_dim() == 0 && o.kind == "t1") {
    throw ConfigError("t1 needs a draft model with hidden states (e.g. --draft tiny:...)");
  }
  const auto curve = train(model, samples, {o.epochs, o.lr, 32, o.seeds.front()});

  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  model.save(dir / "decision.weights");
  {
    std::ofstream f(dir / "samples.jsonl", std::ios::binary);
    write_samples(f, samples);
  }
  std::vector<SeriesPoint> loss;
  for (std::size_t e = 0; e < curve.size(); ++e) loss.push_back({"loss", static_cast<double>(e + 1), curve[e]});
  if (!loss.empty()) emit_series(dir / "loss.tsv", loss);
  const ScoreHistogram h = score_histogram(model, samples);
  {
    std::ofstream f(dir / "histogram.tsv", std::ios::binary);
    f << "bin_low\tbin_high\taccepted\trejected\n";
    for (std::size_t b = 0; b < h.accepted.size(); ++b) {
      f << fmt::format("{}\t{}\t{}\t{}\n", format_real(static_cast<double>(b) / 10.0),
                       format_real(static_cast<double>(b + 1) / 10.0), h.accepted[b], h.rejected[b]);
    }
  }
  out << fmt::format("samples={} accuracy={:.4f} overlap={:.4f} final_loss={}\n", samples.size(),
                     accuracy(model, samples), h.overlap, curve.empty() ? "-" : format_real(curve.back()));
}

void cmd_oracle(const Options& o, bool target_given, std::ostream& out) {
  const ModelPair models = load_model_pair(target_given ? o.target : kOracleTarget, o.draft);
  Options m = o;
  if (m.methods.empty()) m.methods = {"tinit"};
  if (m.trees.empty()) m.trees = {m.methods.front() == "dynamic" ? "fork:W=2,D=2" : "2,1,1"};
  m.methods.resize(1);
  const Method method = build_methods(m, {}).front();
  const OracleSetup setup{
      *models.draft, *models.target, o.temperatures.front(),
      o.siblings == "with" ? SiblingSampling::kWithReplacement : SiblingSampling::kWithoutReplacement,
      o.init == "greedy" ? InitSampling::kGreedy : InitSampling::kWithoutReplacement};
  const auto output = exact_output_joint(method, setup, o.prefix, o.length);
  const auto reference = target_joint(*models.target, o.temperatures.front(), o.prefix, o.length);
  const double tv = total_variation(output, reference);

  std::ostringstream table;
  table << "sequence\ttarget\toutput\n";
  std::map<TokenSeq, std::pair<double, double>> merged;
  for (const auto& [s, p] : reference) merged[s].first = p;
  for (const auto& [s, p] : output) merged[s].second = p;
  for (const auto& [s, pr] : merged) {
    table << fmt::format("{}\t{}\t{}\n", fmt::join(s, " "), format_real(pr.first), format_real(pr.second));
  }
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  std::ofstream(dir / "oracle.tsv", std::ios::binary) << table.str();
  out << fmt::format("method={} config={} length={} tv={}\n", method_name(method), method_config(method), o.length,
                     format_real(tv));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-candidate speculative decoding bench harness", "mcsd-bench"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Run methods over prompts and write result tables");
  add_common(run, o);

  auto* grid = app.add_subcommand("grid", "Grid search over tree configurations");
  add_common(grid, o);
  grid->add_option("--widths", o.widths, "Fork widths when no --tree is given")->delimiter(',');
  grid->add_option("--depths", o.depths, "Fork depths when no --tree is given")->delimiter(',');

  auto* sweep = app.add_subcommand("sweep-width", "Alpha and speed against fork width");
  add_common(sweep, o);
  sweep->add_option("--depth", o.depth, "Fixed fork depth");
  sweep->add_option("--widths", o.widths, "Widths (default 1..16)")->delimiter(',');

  auto* ablate = app.add_subcommand("ablate-decision", "Fork tree with and without the decision model");
  add_common(ablate, o);

  auto* trainer = app.add_subcommand("train-decision", "Collect verdicts and train a decision model");
  add_common(trainer, o);
  trainer->add_option("--kind", o.kind, "t1 | t2")->check(CLI::IsMember({"t1", "t2"}));
  trainer->add_option("--label", o.label, "T1 label: min | paper")->check(CLI::IsMember({"min", "paper"}));
  trainer->add_option("--epochs", o.epochs, "Training epochs");
  trainer->add_option("--lr", o.lr, "Learning rate");
  trainer->add_option("--top-k", o.top_k, "T2 top-k");
  trainer->add_flag("--no-balance", o.no_balance, "Keep the natural class ratio");

  auto* oracle = app.add_subcommand("oracle-check", "Exact output distribution against the target");
  add_common(oracle, o);
  oracle->add_option("--prefix", o.prefix, "Prefix token ids")->delimiter(',');
  oracle->add_option("--length", o.length, "Joint length in tokens");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*run) cmd_run(o, out, err);
    if (*grid) cmd_grid(o, out, err);
    if (*sweep) cmd_sweep(o, out, err);
    if (*ablate) cmd_ablate(o, out, err);
    if (*trainer) cmd_train(o, out, err);
    if (*oracle) cmd_oracle(o, oracle->count("--target") > 0, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mcsd
