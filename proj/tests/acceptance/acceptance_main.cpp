// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 on any FAIL.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"
#include "mcsd/bench/experiment.hpp"
#include "mcsd/bench/prompts.hpp"
#include "mcsd/decision/training.hpp"
#include "mcsd/engine/improvement_factor.hpp"
#include "mcsd/engine/oracle.hpp"
#include "mcsd/engine/session.hpp"
#include "mcsd/engine/step.hpp"
#include "mcsd/model/synthetic.hpp"
#include "mcsd/tree/topology_mask.hpp"

namespace mcsd {
namespace {

namespace fs = std::filesystem;
using testing::random_table;
using testing::random_tree;

struct Check {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;  // 0 = no runtime bound
  std::function<Check()> run;
};

Check fail(std::string why) { return {false, std::move(why)}; }

Check sd_exactness() {
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t vocab = 2 + rng.below(3);
    const TabularModel target = random_table(rng, vocab);
    const TabularModel draft = random_table(rng, vocab);
    const int gamma = 1 + static_cast<int>(rng.below(2));
    const TokenSeq prefix{static_cast<TokenId>(rng.below(vocab))};
    const Distribution out = exact_output_distribution(BaselineSdMethod{gamma}, {draft, target}, prefix);
    worst = std::max(worst, total_variation(out, target.row_for(prefix)));
  }
  return {worst < 1e-9, fmt::format("200 pairs, max TV {:.3e}", worst)};
}

Check mcsd_exactness() {
  Rng rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vocab = 2 + rng.below(3);
    const TabularModel target = random_table(rng, vocab);
    const TabularModel draft = random_table(rng, vocab);
    const TreeConfig tree = random_tree(rng, kOracleMaxNodes);
    const TokenSeq prefix{static_cast<TokenId>(rng.below(vocab))};
    const Distribution out = exact_output_distribution(McsdMethod{tree}, {draft, target}, prefix);
    worst = std::max(worst, total_variation(out, target.row_for(prefix)));
  }
  return {worst < 1e-9, fmt::format("100 trees, max TV {:.3e}", worst)};
}

Check single_init_equivalence() {
  Rng rng(1003);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t vocab = 2 + rng.below(2);
    const TabularModel target = random_table(rng, vocab);
    const TabularModel draft = random_table(rng, vocab);
    const TreeConfig sub = random_tree(rng, kOracleMaxNodes - 1);
    std::vector<int> branching{1};
    for (int b : sub.level_branching()) branching.push_back(b);
    const TokenSeq prefix{static_cast<TokenId>(rng.below(vocab))};
    const OracleSetup setup{draft, target};
    const auto a = exact_output_joint(TargetInitMethod{TreeConfig::expansion(branching, true)}, setup, prefix, 2);
    const auto b = exact_output_joint(McsdMethod{sub}, setup, prefix, 2);
    worst = std::max(worst, total_variation(a, b));
  }
  return {worst < 1e-9, fmt::format("50 cases, max TV {:.3e}", worst)};
}

Check two_init_divergence() {
  const auto pair = testing::divergence_pair();
  const TreeConfig tree = TreeConfig::expansion({2, 1}, true);
  const TokenSeq prefix{0};
  const Distribution exact = exact_output_distribution(TargetInitMethod{tree}, {pair.draft, pair.target}, prefix);
  const double tv = total_variation(exact, pair.target.row_for(prefix));

  const StepContext ctx{pair.draft, pair.target};
  const TreePlan plan(tree);
  Rng rng(1004);
  const int n = 1000000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += target_init_step(ctx, plan, prefix, rng).emitted.front() == 0;
  const double mc = zeros / static_cast<double>(n);
  const double se = std::sqrt(exact[0] * (1.0 - exact[0]) / n);
  const double z = std::abs(mc - exact[0]) / se;
  Check v{tv > 0.01 && z < 3.0,
          fmt::format("oracle P(0)={:.6f} TV={:.4f}; MC P(0)={:.6f} ({:.2f} SE)", exact[0], tv, mc, z)};
  return v;
}

Check alpha_direction() {
  const TabularModel target = make_synthetic_target({32, 1, 2.5, 1});
  const TabularModel draft = smoothed_draft(target, 1.5);
  const auto prompts = synthetic_prompts(target, 50, 8, 7);
  const StepContext ctx{draft, target};
  const TreePlan tinit(parse_tree_config("2,4,3,1,1", true));
  const TreePlan mcsd(parse_tree_config("4,2,2,1"));
  SessionStats a;
  SessionStats b;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const TokenSeq& prefix = prompts[i % prompts.size()];
    Rng ra = Rng::derived(1005, i);
    Rng rb = Rng::derived(1005, i);
    const StepOutcome oa = target_init_step(ctx, tinit, prefix, ra);
    const StepOutcome ob = mcsd_step(ctx, mcsd, prefix, rb);
    a.add(oa, oa.emitted.size());
    b.add(ob, ob.emitted.size());
  }
  const double aa = *a.alpha();
  const double ab = *b.alpha();
  return {aa > ab, fmt::format("tinit(2,4,3,1,1) {:.4f} vs mcsd(4,2,2,1) {:.4f}, margin {:+.4f}", aa, ab, aa - ab)};
}

Check improvement_factor_formula() {
  for (int g = 1; g <= 16; ++g) {
    for (double c : {0.01, 0.1, 0.25, 1.0, 3.0}) {
      if (improvement_factor(0.0, g, c) != 1.0 / (c * g + 1.0)) return fail(fmt::format("alpha=0 g={} c={}", g, c));
    }
  }
  // Independent closed-form evaluation in tests/oracles/oracle_values.py.
  const double v = improvement_factor(0.8, 4, 0.1);
  if (std::abs(v - 2.4011428571428577) >= 1e-9) return fail(fmt::format("IF(0.8,4,0.1) = {}", v));
  double prev = improvement_factor(0.0, 4, 0.1);
  for (int i = 1; i < 100; ++i) {
    const double cur = improvement_factor(i / 100.0, 4, 0.1);
    if (!(cur > prev)) return fail(fmt::format("not increasing at alpha={}", i / 100.0));
    prev = cur;
  }
  return {true, fmt::format("IF(0.8,4,0.1) = {:.12f}; monotone on 100 points", v)};
}

Check mask_slices() {
  std::size_t checked = 0;
  for (int w = 1; w <= 8; ++w) {
    for (int d = 1; d <= 6; ++d) {
      const TokenTree tree = build_tree_shape(TreeConfig::fork(w, d)).tree;
      const TopologyMask full(tree);
      for (int a = 1; a <= d; ++a) {
        if (!same_cells(slice_mask(full, a, tree), TopologyMask(tree.truncated(a)))) {
          return fail(fmt::format("W={} D={} depth {}", w, d, a));
        }
        ++checked;
      }
    }
  }
  const TokenTree f33 = build_tree_shape(TreeConfig::fork(3, 3)).tree;
  const TopologyMask full(f33);
  const MaskSlice six = slice_mask(full, 2, f33);
  const MaskSlice three = slice_mask(full, 1, f33);
  if (six.size() != 6 || !same_cells(six, TopologyMask(build_tree_shape(TreeConfig::fork(3, 2)).tree))) {
    return fail("6x6 early-stop slice");
  }
  if (three.size() != 3 || !same_cells(three, TopologyMask(build_tree_shape(TreeConfig::fork(3, 1)).tree))) {
    return fail("upper-left 3x3 slice");
  }
  return {true, fmt::format("{} slices equal rebuilt masks, incl. 6x6 and 3x3", checked)};
}

Check config_arithmetic() {
  const TreeShape s = build_tree_shape(TreeConfig::expansion({2, 4, 3, 1, 1}, true));
  return {s.draft_nodes_per_init == 40 && s.leaf_sequences == 24,
          fmt::format("(2,4,3,1,1): {} draft tokens per init token, {} leaf sequences", s.draft_nodes_per_init,
                      s.leaf_sequences)};
}

Check mask_growth_shape() {
  for (int w = 1; w <= 8; ++w) {
    const std::size_t step = mask_growth_fork(w, 2).nodes - mask_growth_fork(w, 1).nodes;
    for (int d = 1; d < 6; ++d) {
      if (mask_growth_fork(w, d + 1).nodes - mask_growth_fork(w, d).nodes != step) {
        return fail(fmt::format("fork W={} not linear at D={}", w, d));
      }
    }
  }
  for (int b = 2; b <= 4; ++b) {
    for (int d = 1; d + 2 <= 6; ++d) {
      const auto n0 = mask_growth_uniform(b, d).nodes;
      const auto n1 = mask_growth_uniform(b, d + 1).nodes;
      const auto n2 = mask_growth_uniform(b, d + 2).nodes;
      if (!(n2 - n1 > n1 - n0)) return fail(fmt::format("expansion b={} not super-linear at D={}", b, d));
    }
  }
  return {true, "fork differences constant, expansion differences strictly increasing"};
}

std::vector<TrainSample> separable_fixture() {
  Rng rng(1010);
  std::vector<TrainSample> out;
  for (std::size_t i = 0; i < 400; ++i) {
    const bool accept = i % 2 == 0;
    const double top = accept ? 0.85 : 0.35;
    const double ent = accept ? 0.4 : 1.6;
    out.push_back({{top + 0.05 * rng.normal(), (1.0 - top) / 2 + 0.02 * rng.normal(), ent + 0.1 * rng.normal()},
                   accept ? 1.0 : 0.0,
                   i});
  }
  return out;
}

Check decision_behavior() {
  const bool rules = should_stop(std::vector<double>{0.1, 0.2, 0.39}, 0.4) &&
                     !should_stop(std::vector<double>{0.1, 0.9}, 0.4) && !should_stop(std::vector<double>{0.4}, 0.4);
  if (!rules) return fail("threshold rule");

  const auto samples = separable_fixture();
  DecisionModel t2{DecisionT2(2, 1)};
  train(t2, samples, {60, 0.5, 16, 1});
  const double acc = accuracy(t2, samples);
  if (!(acc > 0.95)) return fail(fmt::format("T2 training accuracy {:.4f}", acc));

  ExperimentSpec spec;
  auto target = std::make_shared<TabularModel>(make_synthetic_target({32, 1, 2.5, 1}));
  spec.target = target;
  spec.draft = std::make_shared<TabularModel>(smoothed_draft(*target, 1.5));
  spec.prompts = synthetic_prompts(*target, 10, 8, 3);
  spec.max_new_tokens = 100;
  const TreeConfig tree = TreeConfig::fork(4, 4);
  const auto never =
      ablation_decision_model(spec, tree, std::make_shared<DecisionModel>(DecisionModel::constant(1)), 0.4);
  if (never[0].delta_draft_calls != 0 || never[0].delta_alpha != 0.0 || never[0].delta_speedup != 0.0) {
    return fail("constant 1.0 stub changed the run");
  }
  const auto always =
      ablation_decision_model(spec, tree, std::make_shared<DecisionModel>(DecisionModel::constant(0)), 0.4);
  const auto& hist = always[0].on.stats.depth_histogram;
  if (hist.size() != 1 || hist.begin()->first != 1) return fail("constant 0.0 stub did not collapse to depth 1");

  // Reported measurement: a T2 trained on collected verdicts.
  EngineConfig cfg;
  cfg.method = McsdMethod{tree};
  cfg.max_new_tokens = 100;
  DecisionModel learned{DecisionT2()};
  train(learned, collect_training_data(*spec.draft, *spec.target, spec.prompts, cfg));
  const auto measured = ablation_decision_model(spec, tree, std::make_shared<DecisionModel>(learned), 0.4);
  return {true,
          fmt::format("rules ok; T2 accuracy {:.4f}; stubs exact; trained model: d_draft_calls {}, d_speedup {:+.4f}",
                      acc, measured[0].delta_draft_calls, measured[0].delta_speedup)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(std::vector<std::string> args, const fs::path& out) {
  args.insert(args.begin(), "mcsd-bench");
  args.push_back("--out");
  args.push_back(out.string());
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  return run_cli(static_cast<int>(argv.size()), argv.data(), sink, sink);
}

Check cli_determinism() {
  const std::vector<std::vector<std::string>> commands{
      {"run", "--n-prompts", "4", "--max-new-tokens", "40", "--trace", "--method", "vanilla,sd,mcsd,tinit,dynamic"},
      {"grid", "--n-prompts", "3", "--max-new-tokens", "30", "--widths", "1,2,3", "--depths", "1,2"},
      {"sweep-width", "--n-prompts", "3", "--max-new-tokens", "30", "--widths", "1,2,4", "--depth", "3"},
      {"ablate-decision", "--n-prompts", "3", "--max-new-tokens", "30", "--decision", "const:0"},
      {"train-decision", "--n-prompts", "3", "--max-new-tokens", "30", "--epochs", "3"},
      {"oracle-check", "--length", "2"},
  };
  const fs::path root = fs::temp_directory_path() / "mcsd_acceptance_determinism";
  fs::remove_all(root);
  std::size_t files = 0;
  for (const auto& cmd : commands) {
    const fs::path a = root / (cmd[0] + "_a");
    const fs::path b = root / (cmd[0] + "_b");
    if (cli(cmd, a) != 0 || cli(cmd, b) != 0) return fail(cmd[0] + " exited nonzero");
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
    if (names.empty()) return fail(cmd[0] + " wrote no files");
    for (const auto& name : names) {
      if (!fs::exists(b / name) || read_file(a / name) != read_file(b / name)) {
        return fail(fmt::format("{}: {} differs", cmd[0], name.string()));
      }
      ++files;
    }
  }
  fs::remove_all(root);
  return {true, fmt::format("{} subcommands, {} files byte-identical", commands.size(), files)};
}

}  // namespace
}  // namespace mcsd

int main() {
  using namespace mcsd;
  const std::vector<Criterion> criteria{
      {"baseline SD exactness", 10, sd_exactness},
      {"draft-initialized MCSD exactness", 30, mcsd_exactness},
      {"target-init W0=1 equivalence", 0, single_init_equivalence},
      {"target-init W0=2 divergence", 0, two_init_divergence},
      {"alpha improvement direction", 0, alpha_direction},
      {"improvement-factor formula", 0, improvement_factor_formula},
      {"mask-slice equivalence", 5, mask_slices},
      {"config arithmetic", 0, config_arithmetic},
      {"mask growth", 0, mask_growth_shape},
      {"decision-model behavior", 0, decision_behavior},
      {"CLI determinism", 0, cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      v.pass = false;
      v.detail += fmt::format(" (over {:.0f} s budget)", c.budget_s);
    }
    failed += v.pass ? 0 : 1;
    std::cout << fmt::format("{} {}: {} [{:.2f} s]", v.pass ? "PASS" : "FAIL", c.name, v.detail, secs) << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", criteria.size() - static_cast<std::size_t>(failed), criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
