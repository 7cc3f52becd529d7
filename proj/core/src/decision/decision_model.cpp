#include "mcsd/decision/decision_model.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mcsd/error.hpp"
#include "mcsd/model/sampling.hpp"

namespace mcsd {

std::vector<double> extract_features_t2(const Distribution& draft_dist, std::size_t k) {
  if (k > draft_dist.size()) {
    throw ArgumentError(fmt::format("top-k of {} exceeds vocabulary of {}", k, draft_dist.size()));
  }
  std::vector<double> sorted(draft_dist.probs().begin(), draft_dist.probs().end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end(), std::greater<>());
  std::vector<double> features(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k));
  features.push_back(entropy(draft_dist));
  return features;
}

DecisionT1::DecisionT1(std::size_t input_dim, std::uint64_t seed, RatioLabel label)
    : net_({input_dim, kHidden1, kHidden2, 1}, seed), label_(label) {}

DecisionT2::DecisionT2(std::size_t top_k, std::uint64_t seed) : net_({top_k + 1, kHidden, 1}, seed), top_k_(top_k) {
  if (top_k == 0) throw ConfigError("top-k must be positive");
}

std::string DecisionModel::kind() const {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DecisionT1>) return "t1";
        if constexpr (std::is_same_v<T, DecisionT2>) return "t2";
        return "constant";
      },
      impl_);
}

std::vector<double> DecisionModel::featurize(const DraftFeatures& features) const {
  if (std::holds_alternative<DecisionT1>(impl_)) return features.hidden;
  if (const auto* t2 = std::get_if<DecisionT2>(&impl_)) return extract_features_t2(features.draft_dist, t2->top_k());
  return {};
}

double DecisionModel::score_features(std::span<const double> features) const {
  if (const auto* c = std::get_if<ConstantDecision>(&impl_)) return c->value;
  if (const auto* t1 = std::get_if<DecisionT1>(&impl_)) return t1->net().predict(features);
  return std::get<DecisionT2>(impl_).net().predict(features);
}

std::vector<double> DecisionModel::score_batch(std::span<const DraftFeatures> batch) const {
  std::vector<double> scores;
  scores.reserve(batch.size());
  for (const auto& f : batch) scores.push_back(score(f));
  return scores;
}

std::size_t DecisionModel::required_hidden_dim() const noexcept {
  if (const auto* t1 = std::get_if<DecisionT1>(&impl_)) return t1->input_dim();
  return 0;
}

WeightFile DecisionModel::to_weights() const {
  WeightFile wf;
  wf.set_meta("kind", "decision_" + kind());
  if (const auto* c = std::get_if<ConstantDecision>(&impl_)) {
    wf.set_meta("value", fmt::format("{:.17g}", c->value));
  } else if (const auto* t1 = std::get_if<DecisionT1>(&impl_)) {
    wf.set_meta("label", t1->label() == RatioLabel::kVerbatimMax ? "max" : "min");
    t1->net().write_to(wf, "");
  } else {
    const auto& t2 = std::get<DecisionT2>(impl_);
    wf.set_meta("top_k", std::to_string(t2.top_k()));
    t2.net().write_to(wf, "");
  }
  return wf;
}

DecisionModel DecisionModel::from_weights(const WeightFile& weights) {
  const std::string kind = weights.require_meta("kind");
  if (kind == "decision_constant") return constant(std::stod(weights.require_meta("value")));
  if (kind == "decision_t1") {
    const RatioLabel label =
        weights.require_meta("label") == "max" ? RatioLabel::kVerbatimMax : RatioLabel::kAcceptanceProbability;
    Mlp net = Mlp::read_from(weights, "", 3);
    const auto& s = net.layer_sizes();
    if (s[1] != DecisionT1::kHidden1 || s[2] != DecisionT1::kHidden2) throw ParseError("unexpected T1 widths", 0);
    return DecisionModel(DecisionT1(std::move(net), label));
  }
  if (kind == "decision_t2") {
    const std::size_t k = std::stoul(weights.require_meta("top_k"));
    Mlp net = Mlp::read_from(weights, "", 2);
    if (net.input_dim() != k + 1) throw ParseError("T2 input width must be top_k + 1", 0);
    return DecisionModel(DecisionT2(std::move(net), k));
  }
  throw ParseError(fmt::format("unknown decision model kind '{}'", kind), 0);
}

bool should_stop(std::span<const double> scores, double beta) {
  if (scores.empty()) throw ArgumentError("should_stop needs at least one chain");
  return std::all_of(scores.begin(), scores.end(), [beta](double s) { return s < beta; });
}

bool should_stop(const DecisionModel& model, std::span<const DraftFeatures> batch, double beta) {
  if (batch.empty()) throw ArgumentError("should_stop needs at least one chain");
  const auto scores = model.score_batch(batch);
  return should_stop(scores, beta);
}

}  // namespace mcsd
