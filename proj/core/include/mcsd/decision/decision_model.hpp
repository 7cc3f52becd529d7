#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcsd/decision/mlp.hpp"
#include "mcsd/model/distribution.hpp"
#include "mcsd/model/weight_file.hpp"

namespace mcsd {

/// Early-stop threshold used when none is configured.
inline constexpr double kDefaultStopThreshold = 0.4;

/// What the draft model produced when it sampled a chain's newest token: the
/// distribution it was drawn from and the hidden state at that position.
struct DraftFeatures {
  std::vector<double> hidden;
  Distribution draft_dist;
};

/// Top-k probabilities (descending) followed by the entropy in nats.
/// Throws ArgumentError when k exceeds the vocabulary.
std::vector<double> extract_features_t2(const Distribution& draft_dist, std::size_t k);

/// Regression target for the hidden-state scorer.
enum class RatioLabel {
  kAcceptanceProbability,  // min(1, p/q)
  kVerbatimMax,            // max(1, p/q)
};

/// Hidden-state scorer: [hidden, 64, 32, 1], squared error on a ratio label.
class DecisionT1 {
 public:
  static constexpr std::size_t kHidden1 = 64;
  static constexpr std::size_t kHidden2 = 32;

  DecisionT1(std::size_t input_dim, std::uint64_t seed, RatioLabel label = RatioLabel::kAcceptanceProbability);

  std::size_t input_dim() const noexcept { return net_.input_dim(); }
  RatioLabel label() const noexcept { return label_; }
  Mlp& net() noexcept { return net_; }
  const Mlp& net() const noexcept { return net_; }

 private:
  friend class DecisionModel;
  DecisionT1(Mlp net, RatioLabel label) : net_(std::move(net)), label_(label) {}

  Mlp net_;
  RatioLabel label_;
};

/// Top-k + entropy scorer: [k+1, 16, 1], binary cross-entropy on accept/reject.
class DecisionT2 {
 public:
  static constexpr std::size_t kHidden = 16;
  static constexpr std::size_t kDefaultTopK = 5;

  explicit DecisionT2(std::size_t top_k = kDefaultTopK, std::uint64_t seed = 0);

  std::size_t top_k() const noexcept { return top_k_; }
  Mlp& net() noexcept { return net_; }
  const Mlp& net() const noexcept { return net_; }

 private:
  friend class DecisionModel;
  DecisionT2(Mlp net, std::size_t top_k) : net_(std::move(net)), top_k_(top_k) {}

  Mlp net_;
  std::size_t top_k_;
};

/// Fixed score; needs no inference, so it is not counted as a decision call.
struct ConstantDecision {
  double value = 1.0;
};

class DecisionModel {
 public:
  using Variant = std::variant<DecisionT1, DecisionT2, ConstantDecision>;

  DecisionModel(Variant impl) : impl_(std::move(impl)) {}  // NOLINT(google-explicit-constructor)
  static DecisionModel constant(double value) { return DecisionModel(ConstantDecision{value}); }

  /// "t1", "t2" or "constant".
  std::string kind() const;
  bool is_constant() const noexcept { return std::holds_alternative<ConstantDecision>(impl_); }

  /// Feature vector the network consumes (empty for constants).
  std::vector<double> featurize(const DraftFeatures& features) const;
  double score_features(std::span<const double> features) const;
  double score(const DraftFeatures& features) const { return score_features(featurize(features)); }
  std::vector<double> score_batch(std::span<const DraftFeatures> batch) const;

  /// Hidden-state width the model expects, 0 when it does not read hidden states.
  std::size_t required_hidden_dim() const noexcept;

  Variant& impl() noexcept { return impl_; }
  const Variant& impl() const noexcept { return impl_; }

  WeightFile to_weights() const;
  static DecisionModel from_weights(const WeightFile& weights);
  void save(const std::filesystem::path& path) const { to_weights().save(path); }
  static DecisionModel load(const std::filesystem::path& path) { return from_weights(WeightFile::load(path)); }

 private:
  Variant impl_;
};

/// True iff every score is strictly below beta. Throws ArgumentError on an
/// empty batch.
bool should_stop(std::span<const double> scores, double beta = kDefaultStopThreshold);
bool should_stop(const DecisionModel& model, std::span<const DraftFeatures> batch, double beta = kDefaultStopThreshold);

}  // namespace mcsd
