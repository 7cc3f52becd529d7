#include "mcsd/engine/session.hpp"

#include <fmt/format.h>

#include "mcsd/error.hpp"

namespace mcsd {

std::optional<double> SessionStats::alpha() const {
  if (sum_max_draft == 0) return std::nullopt;
  return static_cast<double>(sum_longest_accepted) / static_cast<double>(sum_max_draft);
}

void SessionStats::add(const StepOutcome& outcome, std::size_t appended) {
  total_emitted += appended;
  ++total_steps;
  sum_longest_accepted += static_cast<std::uint64_t>(outcome.longest_accepted);
  sum_max_draft += static_cast<std::uint64_t>(outcome.max_draft_len);
  early_stops += outcome.early_stopped ? 1 : 0;
  draft_tokens += outcome.draft_tokens;
  calls += outcome.calls;
  if (outcome.max_draft_len > 0) ++depth_histogram[outcome.depth_reached];
}

SessionStats& SessionStats::operator+=(const SessionStats& o) {
  total_emitted += o.total_emitted;
  total_steps += o.total_steps;
  sum_longest_accepted += o.sum_longest_accepted;
  sum_max_draft += o.sum_max_draft;
  early_stops += o.early_stops;
  draft_tokens += o.draft_tokens;
  calls += o.calls;
  for (const auto& [depth, count] : o.depth_histogram) depth_histogram[depth] += count;
  return *this;
}

void PrefixCache::commit(TokenSpan tokens, const std::vector<std::vector<double>>& logits) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    tokens_.push_back(tokens[i]);
    if (i < logits.size()) {
      logits_.emplace_back(logits[i]);
    } else {
      logits_.emplace_back(std::nullopt);
    }
  }
}

std::size_t PrefixCache::cached_positions() const noexcept {
  std::size_t n = 0;
  for (const auto& l : logits_) n += l.has_value() ? 1 : 0;
  return n;
}

bool PrefixCache::validate(const LanguageModel& target) const {
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    if (!logits_[i]) continue;
    if (target.next(TokenSpan(tokens_.data(), i + 1)).logits != *logits_[i]) return false;
  }
  return true;
}

std::uint64_t session_seed(std::uint64_t seed, std::size_t index) { return Rng::derived(seed, index).next_u64(); }

namespace {

struct Stepper {
  const EngineConfig& config;
  StepContext ctx;
  std::optional<TreePlan> plan;

  StepOutcome step(TokenSpan prefix, Rng& rng, const std::optional<Distribution>& pending) const {
    return std::visit(
        [&](const auto& m) -> StepOutcome {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, VanillaMethod>) {
            return vanilla_step(ctx, prefix, rng);
          } else if constexpr (std::is_same_v<M, BaselineSdMethod>) {
            return baseline_sd_step(ctx, prefix, m.gamma, rng);
          } else if constexpr (std::is_same_v<M, McsdMethod>) {
            return mcsd_step(ctx, *plan, prefix, rng);
          } else if constexpr (std::is_same_v<M, TargetInitMethod>) {
            return target_init_step(ctx, *plan, prefix, rng, pending);
          } else {
            return dynamic_mcsd_step(ctx, *plan, prefix, *m.decision, m.beta, rng, pending);
          }
        },
        config.method);
  }
};

std::optional<TreeConfig> tree_of(const Method& method) {
  if (const auto* m = std::get_if<McsdMethod>(&method)) return m->tree;
  if (const auto* m = std::get_if<TargetInitMethod>(&method)) return m->tree;
  if (const auto* m = std::get_if<DynamicMethod>(&method)) return m->tree;
  return std::nullopt;
}

}  // namespace

GenerationResult run_generation(const EngineConfig& config, const LanguageModel& draft, const LanguageModel& target,
                                TokenSpan prompt, const GenerationOptions& options) {
  if (prompt.empty()) throw ArgumentError("prompt must not be empty");
  config.validate();
  Stepper stepper{config,
                  StepContext{draft, target, config.temperature, config.siblings, config.init, options.capture_detail},
                  std::nullopt};
  if (auto tree = tree_of(config.method)) stepper.plan.emplace(*tree);

  GenerationResult result{{}, {}, {}, PrefixCache(TokenSeq(prompt.begin(), prompt.end()))};
  const std::string name = method_name(config.method);
  const auto budget = static_cast<std::size_t>(config.max_new_tokens);
  Rng rng(config.seed);
  std::optional<Distribution> pending;
  bool done = false;
  while (!done && result.tokens.size() < budget) {
    const TokenSeq& prefix = result.cache.tokens();
    StepOutcome outcome = stepper.step(prefix, rng, pending);
    if (options.on_step) options.on_step(outcome, prefix);

    std::size_t take = std::min(outcome.emitted.size(), budget - result.tokens.size());
    if (config.eos) {
      for (std::size_t i = 0; i < take; ++i) {
        if (outcome.emitted[i] == *config.eos) {
          take = i + 1;
          done = true;
          break;
        }
      }
    }
    const TokenSpan appended(outcome.emitted.data(), take);
    result.tokens.insert(result.tokens.end(), appended.begin(), appended.end());
    result.cache.commit(appended, outcome.committed_target_logits);
    pending = take == outcome.emitted.size() ? std::move(outcome.pending_root) : std::nullopt;

    result.stats.add(outcome, take);
    result.trace.push_back({result.stats.total_steps - 1, name, outcome.depth_reached, outcome.longest_accepted,
                            outcome.max_draft_len, take, outcome.calls, outcome.early_stopped, outcome.draft_tokens});
  }
  return result;
}

}  // namespace mcsd
