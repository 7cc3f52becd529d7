#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mcsd/decision/decision_model.hpp"
#include "mcsd/engine/engine_config.hpp"
#include "mcsd/model/language_model.hpp"

namespace mcsd {

struct TrainSample {
  std::vector<double> features;
  double label = 0.0;
  std::size_t step_id = 0;
};

enum class FeatureKind {
  kHiddenState,  // T1: draft hidden state, ratio label
  kTopKEntropy,  // T2: top-k + entropy, accept/reject label
};

struct CollectOptions {
  FeatureKind features = FeatureKind::kTopKEntropy;
  std::size_t top_k = DecisionT2::kDefaultTopK;
  RatioLabel ratio = RatioLabel::kAcceptanceProbability;
  /// Oversample the minority class until accepted and rejected counts match.
  bool balance = true;
  /// Seeds the labels of draft tokens that verification never reached and
  /// the balancing draws.
  std::uint64_t label_seed = 0;
};

/// Runs instrumented generation over every prompt and records one sample per
/// draft token. Tokens never tested by verification get a Bernoulli label
/// with the acceptance probability min(1, p/q). Throws ArgumentError when
/// `prompts` is empty.
std::vector<TrainSample> collect_training_data(const LanguageModel& draft, const LanguageModel& target,
                                               const std::vector<TokenSeq>& prompts, const EngineConfig& config,
                                               const CollectOptions& options = {});

struct TrainOptions {
  int epochs = 30;
  double learning_rate = 0.5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

/// Mini-batch SGD: squared error for T1, binary cross-entropy for T2. Returns
/// the mean loss per epoch. Constant models are left untouched.
std::vector<double> train(DecisionModel& model, const std::vector<TrainSample>& samples,
                          const TrainOptions& options = {});

/// Share of samples whose score falls on the label's side of `cutoff`.
double accuracy(const DecisionModel& model, const std::vector<TrainSample>& samples, double cutoff = 0.5);

struct ScoreHistogram {
  std::vector<std::size_t> accepted;
  std::vector<std::size_t> rejected;
  /// Sum over bins of the smaller normalized mass; 1 = identical, 0 = disjoint.
  double overlap = 0.0;
};

ScoreHistogram score_histogram(const DecisionModel& model, const std::vector<TrainSample>& samples,
                               std::size_t bins = 10);

/// One JSON object per line: step_id, label, features.
void write_samples(std::ostream& out, const std::vector<TrainSample>& samples);

}  // namespace mcsd
