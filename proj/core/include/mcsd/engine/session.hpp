#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcsd/engine/engine_config.hpp"
#include "mcsd/engine/step.hpp"
#include "mcsd/model/language_model.hpp"

namespace mcsd {

/// One trace line: the per-step counters a session reports.
struct StepRecord {
  std::size_t step = 0;
  std::string method;
  int depth_reached = 0;
  int longest_accepted = 0;
  int max_draft_len = 0;
  std::size_t emitted = 0;  // tokens appended after truncation
  CallCounts calls;
  bool early_stopped = false;
  std::size_t draft_tokens = 0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SessionStats {
  std::size_t total_emitted = 0;
  std::size_t total_steps = 0;
  std::uint64_t sum_longest_accepted = 0;
  std::uint64_t sum_max_draft = 0;
  std::uint64_t early_stops = 0;
  std::uint64_t draft_tokens = 0;
  CallCounts calls;
  std::map<int, std::uint64_t> depth_histogram;

  /// sum_longest_accepted / sum_max_draft; absent when nothing was drafted.
  std::optional<double> alpha() const;
  void add(const StepOutcome& outcome, std::size_t appended);
  SessionStats& operator+=(const SessionStats& o);
};

/// Target logits for each committed position, keyed by the accepted prefix.
/// Rejected branches never enter; entries can be checked by recomputation.
class PrefixCache {
 public:
  explicit PrefixCache(TokenSeq prompt = {}) : tokens_(std::move(prompt)), logits_(tokens_.size()) {}

  /// Appends committed tokens; `logits[i]` (may be absent) is the target output
  /// after tokens[i].
  void commit(TokenSpan tokens, const std::vector<std::vector<double>>& logits);

  const TokenSeq& tokens() const noexcept { return tokens_; }
  std::size_t cached_positions() const noexcept;
  /// True iff every cached entry equals target.next on its prefix.
  bool validate(const LanguageModel& target) const;

 private:
  TokenSeq tokens_;
  std::vector<std::optional<std::vector<double>>> logits_;
};

struct GenerationOptions {
  bool capture_detail = false;
  std::function<void(const StepOutcome&, TokenSpan prefix)> on_step;
};

struct GenerationResult {
  TokenSeq tokens;  // generated tokens, prompt excluded
  SessionStats stats;
  std::vector<StepRecord> trace;
  PrefixCache cache;
};

/// Seed of the session for the `index`-th prompt of a run seeded with `seed`.
std::uint64_t session_seed(std::uint64_t seed, std::size_t index);

/// Runs steps until max_new_tokens are produced or the eos token is emitted.
/// The last step's emissions are truncated to the budget. Throws ArgumentError
/// on an empty prompt.
GenerationResult run_generation(const EngineConfig& config, const LanguageModel& draft, const LanguageModel& target,
                                TokenSpan prompt, const GenerationOptions& options = {});

}  // namespace mcsd
