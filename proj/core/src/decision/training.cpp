#include "mcsd/decision/training.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>

#include "mcsd/engine/session.hpp"
#include "mcsd/error.hpp"
#include "mcsd/model/rng.hpp"

namespace mcsd {

namespace {

double ratio_label(const DraftRecord& r, RatioLabel kind) {
  const double ratio = r.draft_prob > 0.0 ? r.target_prob / r.draft_prob : 0.0;
  return kind == RatioLabel::kVerbatimMax ? std::max(1.0, ratio) : std::min(1.0, ratio);
}

void balance(std::vector<TrainSample>& samples, Rng& rng) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < samples.size(); ++i) (samples[i].label >= 0.5 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) return;
  const auto& minority = pos.size() < neg.size() ? pos : neg;
  const std::size_t extra = std::max(pos.size(), neg.size()) - minority.size();
  for (std::size_t k = 0; k < extra; ++k) samples.push_back(samples[minority[rng.below(minority.size())]]);
}

}  // namespace

std::vector<TrainSample> collect_training_data(const LanguageModel& draft, const LanguageModel& target,
                                               const std::vector<TokenSeq>& prompts, const EngineConfig& config,
                                               const CollectOptions& options) {
  if (prompts.empty()) throw ArgumentError("training corpus is empty");
  Rng label_rng(options.label_seed);
  std::vector<TrainSample> samples;
  std::size_t step_id = 0;
  GenerationOptions gen;
  gen.capture_detail = true;
  gen.on_step = [&](const StepOutcome& outcome, TokenSpan) {
    for (const DraftRecord& r : outcome.draft_records) {
      TrainSample s;
      s.step_id = step_id;
      if (options.features == FeatureKind::kHiddenState) {
        s.features = r.features.hidden;
        s.label = ratio_label(r, options.ratio);
      } else {
        s.features = extract_features_t2(r.features.draft_dist, options.top_k);
        if (r.verdict == Verdict::kUntested) {
          s.label = label_rng.uniform() < ratio_label(r, RatioLabel::kAcceptanceProbability) ? 1.0 : 0.0;
        } else {
          s.label = r.verdict == Verdict::kAccepted ? 1.0 : 0.0;
        }
      }
      samples.push_back(std::move(s));
    }
    ++step_id;
  };
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    EngineConfig c = config;
    c.seed = session_seed(config.seed, i);
    run_generation(c, draft, target, prompts[i], gen);
  }
  if (options.balance && options.features == FeatureKind::kTopKEntropy) balance(samples, label_rng);
  return samples;
}

std::vector<double> train(DecisionModel& model, const std::vector<TrainSample>& samples, const TrainOptions& options) {
  std::vector<double> curve;
  if (model.is_constant() || options.epochs <= 0) return curve;
  if (samples.empty()) throw ArgumentError("training needs at least one sample");
  if (options.batch_size == 0) throw ArgumentError("batch size must be positive");
  Mlp* net = nullptr;
  Loss loss = Loss::kBinaryCrossEntropy;
  if (auto* t1 = std::get_if<DecisionT1>(&model.impl())) {
    net = &t1->net();
    loss = Loss::kSquaredError;
  } else {
    net = &std::get<DecisionT2>(model.impl()).net();
  }
  for (const auto& s : samples) {
    if (s.features.size() != net->input_dim()) {
      throw ArgumentError("sample feature width does not match the decision model input");
    }
  }

  Rng rng(options.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const std::vector<double>*> inputs;
  std::vector<double> labels;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += options.batch_size) {
      inputs.clear();
      labels.clear();
      for (std::size_t k = b; k < std::min(order.size(), b + options.batch_size); ++k) {
        inputs.push_back(&samples[order[k]].features);
        labels.push_back(samples[order[k]].label);
      }
      total += net->sgd_step(inputs, labels, loss, options.learning_rate) * static_cast<double>(inputs.size());
    }
    curve.push_back(total / static_cast<double>(samples.size()));
  }
  return curve;
}

double accuracy(const DecisionModel& model, const std::vector<TrainSample>& samples, double cutoff) {
  if (samples.empty()) throw ArgumentError("accuracy needs at least one sample");
  std::size_t hits = 0;
  for (const auto& s : samples) {
    const bool predicted = model.score_features(s.features) >= cutoff;
    hits += predicted == (s.label >= 0.5) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

ScoreHistogram score_histogram(const DecisionModel& model, const std::vector<TrainSample>& samples, std::size_t bins) {
  if (bins == 0) throw ArgumentError("histogram needs at least one bin");
  ScoreHistogram h{std::vector<std::size_t>(bins, 0), std::vector<std::size_t>(bins, 0), 0.0};
  for (const auto& s : samples) {
    const double score = std::clamp(model.score_features(s.features), 0.0, 1.0);
    const auto bin = std::min(bins - 1, static_cast<std::size_t>(score * static_cast<double>(bins)));
    ++(s.label >= 0.5 ? h.accepted : h.rejected)[bin];
  }
  const auto na = std::accumulate(h.accepted.begin(), h.accepted.end(), std::size_t{0});
  const auto nr = std::accumulate(h.rejected.begin(), h.rejected.end(), std::size_t{0});
  if (na > 0 && nr > 0) {
    for (std::size_t b = 0; b < bins; ++b) {
      h.overlap += std::min(static_cast<double>(h.accepted[b]) / static_cast<double>(na),
                            static_cast<double>(h.rejected[b]) / static_cast<double>(nr));
    }
  }
  return h;
}

void write_samples(std::ostream& out, const std::vector<TrainSample>& samples) {
  for (const auto& s : samples) {
    nlohmann::ordered_json j;
    j["step_id"] = s.step_id;
    j["label"] = s.label;
    j["features"] = s.features;
    out << j.dump() << '\n';
  }
}

}  // namespace mcsd
