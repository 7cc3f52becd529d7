#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "mcsd/engine/engine_config.hpp"
#include "mcsd/model/distribution.hpp"
#include "mcsd/model/language_model.hpp"

namespace mcsd {

/// Largest instance the exact oracle enumerates.
inline constexpr std::size_t kOracleMaxVocab = 5;
inline constexpr std::size_t kOracleMaxNodes = 6;

struct OracleSetup {
  const LanguageModel& draft;
  const LanguageModel& target;
  double temperature = 1.0;
  SiblingSampling siblings = SiblingSampling::kWithoutReplacement;
  InitSampling init = InitSampling::kWithoutReplacement;
};

/// One possible result of a step with its exact probability.
struct OracleOutcome {
  TokenSeq emitted;
  std::optional<Distribution> pending;  // next root distribution (target-init only)
  double prob = 0.0;
};

/// Every outcome of one step, found by enumerating all draft samples and all
/// accept/reject coins. Throws IntractableError past the size bound.
std::vector<OracleOutcome> exact_step_outcomes(const Method& method, const OracleSetup& setup, TokenSpan prefix,
                                               const std::optional<Distribution>& pending = std::nullopt);

/// Exact distribution of the first token a step emits.
Distribution exact_output_distribution(const Method& method, const OracleSetup& setup, TokenSpan prefix);

using SequenceDistribution = std::map<TokenSeq, double>;

/// Exact joint of the first `length` generated tokens, chaining steps.
SequenceDistribution exact_output_joint(const Method& method, const OracleSetup& setup, TokenSpan prefix,
                                        std::size_t length);

/// Joint of `length` tokens sampled from the target alone.
SequenceDistribution target_joint(const LanguageModel& target, double temperature, TokenSpan prefix,
                                  std::size_t length);

double total_variation(const SequenceDistribution& a, const SequenceDistribution& b);

}  // namespace mcsd
