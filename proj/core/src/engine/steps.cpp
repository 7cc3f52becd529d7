#include <fmt/format.h>

#include <algorithm>

#include "mcsd/engine/step.hpp"
#include "mcsd/error.hpp"
#include "mcsd/model/sampling.hpp"

namespace mcsd {

namespace {

Distribution next_dist(const TokenOutput& out, double temperature) {
  return apply_temperature(out.logits, temperature);
}

TokenSeq sample_children(const Distribution& q, std::size_t count, SiblingSampling mode, Rng& rng) {
  if (mode == SiblingSampling::kWithoutReplacement) return sample_without_replacement(q, count, rng);
  TokenSeq out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(q, rng));
  return out;
}

double acceptance(const Distribution& p, const Distribution& q, TokenId x) {
  const double qx = q[x];
  return qx > 0.0 ? std::min(1.0, p[x] / qx) : 0.0;
}

void check_vocabularies(const StepContext& ctx) {
  if (ctx.draft.vocab_size() != ctx.target.vocab_size()) {
    throw ConfigError(fmt::format("draft vocabulary {} differs from target vocabulary {}", ctx.draft.vocab_size(),
                                  ctx.target.vocab_size()));
  }
}

struct StopRule {
  const DecisionModel* model;
  double beta;
};

StepOutcome run_tree_step(const StepContext& ctx, const TreePlan& plan, TokenSpan prefix, Rng& rng,
                          const std::optional<Distribution>& pending_root, const StopRule* stop) {
  check_vocabularies(ctx);
  const TreeConfig& config = plan.config();
  const bool target_init = config.target_initialized();
  const double temp = ctx.temperature;
  if (target_init && static_cast<std::size_t>(config.target_init_width) > ctx.target.vocab_size()) {
    throw ConfigError(fmt::format("target_init_width {} exceeds vocabulary size {}", config.target_init_width,
                                  ctx.target.vocab_size()));
  }
  if (stop && stop->model->required_hidden_dim() != 0 && stop->model->required_hidden_dim() != ctx.draft.hidden_dim()) {
    throw ConfigError(fmt::format("decision model reads {}-wide hidden states, draft model has {}",
                                  stop->model->required_hidden_dim(), ctx.draft.hidden_dim()));
  }

  TokenTree tree = plan.skeleton();
  const std::size_t n = tree.size();
  std::vector<char> active(n, 0);
  std::vector<Distribution> sampled_from(n);
  std::vector<std::vector<double>> hidden_of(n);
  TreeDistributions dists;
  dists.target.resize(n);
  dists.draft.resize(n);

  StepOutcome out;
  out.verdicts.assign(n, Verdict::kUntested);
  out.max_draft_len = plan.draft_levels();

  auto assign_children = [&](int parent, const Distribution& q, const std::vector<double>& hidden) {
    const auto kids =
        parent < 0 ? tree.roots() : std::span<const int>(tree.node(static_cast<std::size_t>(parent)).children);
    const TokenSeq tokens = sample_children(q, kids.size(), ctx.siblings, rng);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto child = static_cast<std::size_t>(kids[i]);
      tree.set_token(child, tokens[i]);
      active[child] = 1;
      sampled_from[child] = q;
      hidden_of[child] = hidden;
      ++out.draft_tokens;
    }
  };

  // Level 1: init tokens from the target, or the first draft level.
  if (target_init) {
    if (pending_root) {
      dists.root_target = *pending_root;
    } else {
      dists.root_target = next_dist(ctx.target.next(prefix), temp);
      ++out.calls.target;
    }
    const auto width = static_cast<std::size_t>(config.target_init_width);
    const TokenSeq init = ctx.init == InitSampling::kGreedy ? top_tokens(dists.root_target, width)
                                                            : sample_without_replacement(dists.root_target, width, rng);
    const auto roots = tree.roots();
    for (std::size_t i = 0; i < init.size(); ++i) {
      tree.set_token(static_cast<std::size_t>(roots[i]), init[i]);
      active[static_cast<std::size_t>(roots[i])] = 1;
    }
  } else {
    const TokenOutput root = ctx.draft.next(prefix);
    ++out.calls.draft;
    ++out.calls.draft_passes;
    dists.root_draft = next_dist(root, temp);
    assign_children(-1, dists.root_draft, root.hidden);
  }
  int depth_done = 1;
  const int first_draft_level = target_init ? 2 : 1;

  auto wants_stop = [&](int level) {
    if (!stop || level < first_draft_level || level >= plan.levels()) return false;
    std::vector<DraftFeatures> batch;
    for (std::size_t j = plan.level_begin(level); j < plan.level_begin(level + 1); ++j) {
      if (active[j]) batch.push_back({hidden_of[j], sampled_from[j]});
    }
    if (batch.empty()) return false;
    if (!stop->model->is_constant()) ++out.calls.decision;
    return should_stop(*stop->model, batch, stop->beta);
  };

  bool stopped = wants_stop(depth_done);
  for (int level = 2; !stopped && level <= plan.levels(); ++level) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < plan.level_begin(level); ++j) {
      if (active[j]) idx.push_back(j);
    }
    TokenSeq tokens;
    std::vector<std::size_t> positions;
    for (std::size_t j : idx) {
      tokens.push_back(tree.node(j).token);
      positions.push_back(prefix.size() + static_cast<std::size_t>(tree.node(j).depth - 1));
    }
    const MaskSlice slice(plan.mask(), idx);
    const ForwardResult fr = forward(ctx.draft, prefix, tokens, slice, positions);
    ++out.calls.draft_passes;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const std::size_t f = idx[a];
      if (tree.node(f).depth != level - 1) continue;
      ++out.calls.draft;
      dists.draft[f] = next_dist(fr.nodes[a], temp);
      assign_children(static_cast<int>(f), dists.draft[f], fr.nodes[a].hidden);
    }
    depth_done = level;
    stopped = wants_stop(level);
  }
  out.early_stopped = stopped;
  out.depth_reached = depth_done - (target_init ? 1 : 0);

  // One tree-masked target pass over everything drafted.
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < n; ++j) {
    if (active[j]) idx.push_back(j);
  }
  TokenSeq tokens;
  for (std::size_t j : idx) tokens.push_back(tree.node(j).token);
  const auto all_positions = position_indices(tree, prefix.size());
  std::vector<std::size_t> positions;
  for (std::size_t j : idx) positions.push_back(all_positions[j]);
  const MaskSlice slice(plan.mask(), idx);
  const ForwardResult fr = forward(ctx.target, prefix, tokens, slice, positions);
  ++out.calls.target;
  std::vector<const std::vector<double>*> target_logits(n, nullptr);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    dists.target[idx[a]] = next_dist(fr.nodes[a], temp);
    target_logits[idx[a]] = &fr.nodes[a].logits;
  }
  if (!target_init) dists.root_target = next_dist(fr.root, temp);

  if (!target_init) {
    VerifyResult res = mcsd_verify(tree, active, dists, -1, ctx.siblings, rng, out.verdicts);
    out.accepted_path = res.accepted_path;
    for (int node : res.accepted_path) {
      out.emitted.push_back(tree.node(static_cast<std::size_t>(node)).token);
      out.committed_target_logits.push_back(*target_logits[static_cast<std::size_t>(node)]);
    }
    out.emitted.push_back(sample(res.final_dist, rng));
    out.longest_accepted = static_cast<int>(res.accepted_path.size());
  } else {
    int best = -1;
    VerifyResult best_res;
    for (int root : tree.roots()) {
      if (!active[static_cast<std::size_t>(root)]) continue;
      VerifyResult res = mcsd_verify(tree, active, dists, root, ctx.siblings, rng, out.verdicts);
      bool better = best < 0;
      if (!better) {
        const TokenId tok = tree.node(static_cast<std::size_t>(root)).token;
        const TokenId best_tok = tree.node(static_cast<std::size_t>(best)).token;
        if (res.accepted_path.size() != best_res.accepted_path.size()) {
          better = res.accepted_path.size() > best_res.accepted_path.size();
        } else if (dists.root_target[tok] != dists.root_target[best_tok]) {
          better = dists.root_target[tok] > dists.root_target[best_tok];
        } else {
          better = tok < best_tok;
        }
      }
      if (better) {
        best = root;
        best_res = std::move(res);
      }
    }
    out.accepted_path.push_back(best);
    out.accepted_path.insert(out.accepted_path.end(), best_res.accepted_path.begin(), best_res.accepted_path.end());
    for (int node : out.accepted_path) {
      out.emitted.push_back(tree.node(static_cast<std::size_t>(node)).token);
      out.committed_target_logits.push_back(*target_logits[static_cast<std::size_t>(node)]);
    }
    out.longest_accepted = static_cast<int>(best_res.accepted_path.size());
    out.pending_root = std::move(best_res.final_dist);
  }

  if (ctx.capture_detail) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || tree.node(j).depth < first_draft_level) continue;
      const TreeNode& node = tree.node(j);
      const Distribution& p_parent =
          node.parent < 0 ? dists.root_target : dists.target[static_cast<std::size_t>(node.parent)];
      out.draft_records.push_back({static_cast<int>(j),
                                   node.token,
                                   {hidden_of[j], sampled_from[j]},
                                   p_parent[node.token],
                                   sampled_from[j][node.token],
                                   out.verdicts[j]});
    }
  }
  return out;
}

}  // namespace

TreePlan::TreePlan(TreeConfig config)
    : config_(std::move(config)),
      shape_(build_tree_shape(config_)),
      mask_(shape_.tree),
      levels_(config_.level_branching()) {
  for (int d = 1; d <= levels() + 1; ++d) {
    level_offsets_.push_back(shape_.tree.count_up_to_depth(d - 1));
  }
}

VerifyResult mcsd_verify(const TokenTree& tree, std::span<const char> active, const TreeDistributions& dists, int start,
                         SiblingSampling siblings, Rng& rng, std::span<Verdict> verdicts) {
  VerifyResult result;
  int cur = start;
  while (true) {
    const Distribution& p_here = cur < 0 ? dists.root_target : dists.target[static_cast<std::size_t>(cur)];
    const auto all_kids =
        cur < 0 ? tree.roots() : std::span<const int>(tree.node(static_cast<std::size_t>(cur)).children);
    std::vector<int> kids;
    for (int k : all_kids) {
      if (active[static_cast<std::size_t>(k)]) kids.push_back(k);
    }
    if (kids.empty()) {
      result.final_dist = p_here;
      result.fully_accepted = true;
      return result;
    }
    Distribution p = p_here;
    std::optional<Distribution> q = cur < 0 ? dists.root_draft : dists.draft[static_cast<std::size_t>(cur)];
    int accepted = -1;
    for (int child : kids) {
      if (!q) break;
      const TokenId x = tree.node(static_cast<std::size_t>(child)).token;
      const double a = acceptance(p, *q, x);
      if (rng.uniform() < a) {
        verdicts[static_cast<std::size_t>(child)] = Verdict::kAccepted;
        accepted = child;
        break;
      }
      verdicts[static_cast<std::size_t>(child)] = Verdict::kRejected;
      p = residual_or_target(p, *q);
      if (siblings == SiblingSampling::kWithoutReplacement) q = without_token(*q, x);
    }
    if (accepted < 0) {
      result.final_dist = std::move(p);
      return result;
    }
    result.accepted_path.push_back(accepted);
    cur = accepted;
  }
}

StepOutcome vanilla_step(const StepContext& ctx, TokenSpan prefix, Rng& rng) {
  StepOutcome out;
  out.emitted.push_back(sample(next_dist(ctx.target.next(prefix), ctx.temperature), rng));
  out.calls.target = 1;
  return out;
}

StepOutcome baseline_sd_step(const StepContext& ctx, TokenSpan prefix, int gamma, Rng& rng) {
  if (gamma < 1) throw ConfigError(fmt::format("gamma must be >= 1, got {}", gamma));
  check_vocabularies(ctx);
  const auto g = static_cast<std::size_t>(gamma);
  StepOutcome out;
  out.max_draft_len = gamma;
  out.depth_reached = gamma;
  out.verdicts.assign(g, Verdict::kUntested);

  TokenSeq seq(prefix.begin(), prefix.end());
  std::vector<Distribution> q(g);
  std::vector<std::vector<double>> hidden(g);
  TokenSeq drafted;
  for (std::size_t i = 0; i < g; ++i) {
    TokenOutput o = ctx.draft.next(seq);
    q[i] = next_dist(o, ctx.temperature);
    hidden[i] = std::move(o.hidden);
    drafted.push_back(sample(q[i], rng));
    seq.push_back(drafted.back());
  }
  out.calls.draft = g;
  out.calls.draft_passes = g;
  out.draft_tokens = g;

  // The target scores all gamma + 1 positions in a single pass.
  std::vector<Distribution> p(g + 1);
  std::vector<std::vector<double>> logits(g + 1);
  seq.assign(prefix.begin(), prefix.end());
  for (std::size_t i = 0; i <= g; ++i) {
    logits[i] = ctx.target.next(seq).logits;
    p[i] = apply_temperature(logits[i], ctx.temperature);
    if (i < g) seq.push_back(drafted[i]);
  }
  out.calls.target = 1;

  std::size_t i = 0;
  for (; i < g; ++i) {
    if (rng.uniform() < acceptance(p[i], q[i], drafted[i])) {
      out.verdicts[i] = Verdict::kAccepted;
      out.accepted_path.push_back(static_cast<int>(i));
      out.emitted.push_back(drafted[i]);
      out.committed_target_logits.push_back(logits[i + 1]);
      continue;
    }
    out.verdicts[i] = Verdict::kRejected;
    out.emitted.push_back(sample(residual_or_target(p[i], q[i]), rng));
    break;
  }
  if (i == g) out.emitted.push_back(sample(p[g], rng));
  out.longest_accepted = static_cast<int>(out.accepted_path.size());

  if (ctx.capture_detail) {
    for (std::size_t k = 0; k < g; ++k) {
      out.draft_records.push_back(
          {static_cast<int>(k), drafted[k], {hidden[k], q[k]}, p[k][drafted[k]], q[k][drafted[k]], out.verdicts[k]});
    }
  }
  return out;
}

StepOutcome mcsd_step(const StepContext& ctx, const TreePlan& plan, TokenSpan prefix, Rng& rng) {
  if (plan.config().target_initialized()) throw ConfigError("mcsd_step needs a draft-initialized tree");
  return run_tree_step(ctx, plan, prefix, rng, std::nullopt, nullptr);
}

StepOutcome target_init_step(const StepContext& ctx, const TreePlan& plan, TokenSpan prefix, Rng& rng,
                             const std::optional<Distribution>& pending_root) {
  if (!plan.config().target_initialized()) throw ConfigError("target_init_step needs target_init_width >= 1");
  return run_tree_step(ctx, plan, prefix, rng, pending_root, nullptr);
}

StepOutcome dynamic_mcsd_step(const StepContext& ctx, const TreePlan& plan, TokenSpan prefix,
                              const DecisionModel& decision, double beta, Rng& rng,
                              const std::optional<Distribution>& pending_root) {
  if (!plan.config().is_fork()) throw ConfigError("dynamic decoding requires a fork-shaped tree");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError(fmt::format("beta must lie in (0,1), got {}", beta));
  const StopRule rule{&decision, beta};
  return run_tree_step(ctx, plan, prefix, rng, pending_root, &rule);
}

}  // namespace mcsd
