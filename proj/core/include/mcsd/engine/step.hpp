#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mcsd/decision/decision_model.hpp"
#include "mcsd/engine/engine_config.hpp"
#include "mcsd/model/distribution.hpp"
#include "mcsd/model/language_model.hpp"
#include "mcsd/model/rng.hpp"
#include "mcsd/tree/token_tree.hpp"
#include "mcsd/tree/topology_mask.hpp"

namespace mcsd {

enum class Verdict : std::uint8_t { kUntested, kAccepted, kRejected };

/// Model invocations in one step or session. `draft` counts positions the
/// draft model evaluates; `draft_passes` counts batched draft forwards.
struct CallCounts {
  std::uint64_t target = 0;
  std::uint64_t draft = 0;
  std::uint64_t draft_passes = 0;
  std::uint64_t decision = 0;

  CallCounts& operator+=(const CallCounts& o) {
    target += o.target;
    draft += o.draft;
    draft_passes += o.draft_passes;
    decision += o.decision;
    return *this;
  }
  friend bool operator==(const CallCounts&, const CallCounts&) = default;
};

/// Per draft token detail, captured on request for decision-model training.
struct DraftRecord {
  int node = -1;
  TokenId token = kNoToken;
  DraftFeatures features;
  double target_prob = 0.0;  // target probability of the token given its parent path
  double draft_prob = 0.0;   // draft probability the token was sampled with
  Verdict verdict = Verdict::kUntested;
};

struct StepOutcome {
  std::vector<int> accepted_path;  // tree node indices, init node first when target-initialized
  TokenSeq emitted;
  std::vector<Verdict> verdicts;  // one per tree node
  CallCounts calls;
  int longest_accepted = 0;  // accepted draft tokens
  int max_draft_len = 0;     // configured draft length
  int depth_reached = 0;     // deepest drafted tree level
  bool early_stopped = false;
  std::size_t draft_tokens = 0;  // draft tokens sampled
  /// Target-initialized steps leave the next root distribution here instead of
  /// sampling a correction/bonus token.
  std::optional<Distribution> pending_root;
  /// Target logits after each committed token of this step, when known.
  std::vector<std::vector<double>> committed_target_logits;
  std::vector<DraftRecord> draft_records;
};

struct StepContext {
  const LanguageModel& draft;
  const LanguageModel& target;
  double temperature = 1.0;
  SiblingSampling siblings = SiblingSampling::kWithoutReplacement;
  InitSampling init = InitSampling::kWithoutReplacement;
  bool capture_detail = false;
};

/// Skeleton, positions and the full topology mask for one tree config, built
/// once and shared by every step of a session. Early-stopped steps verify on
/// index-mapped slices of this mask.
class TreePlan {
 public:
  explicit TreePlan(TreeConfig config);

  const TreeConfig& config() const noexcept { return config_; }
  const TokenTree& skeleton() const noexcept { return shape_.tree; }
  const TreeShape& shape() const noexcept { return shape_; }
  const TopologyMask& mask() const noexcept { return mask_; }
  const std::vector<int>& level_branching() const noexcept { return levels_; }
  int levels() const noexcept { return static_cast<int>(levels_.size()); }
  int draft_levels() const noexcept { return config_.draft_levels(); }
  /// First node index of each depth; level_begin(d) for d in 1..levels()+1.
  std::size_t level_begin(int depth) const { return level_offsets_.at(static_cast<std::size_t>(depth - 1)); }

 private:
  TreeConfig config_;
  TreeShape shape_;
  TopologyMask mask_;
  std::vector<int> levels_;
  std::vector<std::size_t> level_offsets_;
};

/// Per-node target/draft next-token distributions. `target[j]`/`draft[j]`
/// hold p(.|path to j) and q(.|path to j); entries not computed are empty.
struct TreeDistributions {
  Distribution root_target;
  Distribution root_draft;
  std::vector<Distribution> target;
  std::vector<Distribution> draft;
};

struct VerifyResult {
  std::vector<int> accepted_path;
  Distribution final_dist;  // correction (last residual) or bonus distribution
  bool fully_accepted = false;
};

/// Multi-candidate verification starting below `start` (-1 = the prefix).
/// Walks down the tree; at each level the active children of the current node
/// are tested in order with acceptance min(1, p(x)/q(x)); after a rejection
/// p <- normalize(max(0, p - q)) and, without replacement, q loses the token.
/// Verdicts are written into `verdicts`.
VerifyResult mcsd_verify(const TokenTree& tree, std::span<const char> active, const TreeDistributions& dists, int start,
                         SiblingSampling siblings, Rng& rng, std::span<Verdict> verdicts);

StepOutcome vanilla_step(const StepContext& ctx, TokenSpan prefix, Rng& rng);

/// Single-chain speculative decoding with gamma draft tokens.
StepOutcome baseline_sd_step(const StepContext& ctx, TokenSpan prefix, int gamma, Rng& rng);

/// Draft-initialized multi-candidate step.
StepOutcome mcsd_step(const StepContext& ctx, const TreePlan& plan, TokenSpan prefix, Rng& rng);

/// Target-initialized step. Roots are drawn from `pending_root` when given,
/// otherwise from a target forward on the prefix (one extra target call).
StepOutcome target_init_step(const StepContext& ctx, const TreePlan& plan, TokenSpan prefix, Rng& rng,
                             const std::optional<Distribution>& pending_root = std::nullopt);

/// Fork step with early stopping: after each draft turn but the last, the
/// decision model scores every chain's newest token and drafting halts when
/// all scores fall below beta.
StepOutcome dynamic_mcsd_step(const StepContext& ctx, const TreePlan& plan, TokenSpan prefix,
                              const DecisionModel& decision, double beta, Rng& rng,
                              const std::optional<Distribution>& pending_root = std::nullopt);

}  // namespace mcsd
