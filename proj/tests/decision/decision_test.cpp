#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "mcsd/decision/decision_model.hpp"
#include "mcsd/decision/training.hpp"
#include "mcsd/engine/session.hpp"
#include "mcsd/error.hpp"
#include "mcsd/model/synthetic.hpp"

namespace mcsd {
namespace {

using testing::table;

TEST(FeaturesT2, Examples) {
  EXPECT_EQ(extract_features_t2(Distribution::one_hot(3, 1), 2), (std::vector<double>{1.0, 0.0, 0.0}));
  const auto u = extract_features_t2(Distribution::uniform(4), 2);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_DOUBLE_EQ(u[0], 0.25);
  EXPECT_DOUBLE_EQ(u[1], 0.25);
  EXPECT_NEAR(u[2], std::log(4.0), 1e-12);
  const auto f = extract_features_t2(Distribution({0.2, 0.5, 0.3}), 3);
  EXPECT_EQ((std::vector<double>{f[0], f[1], f[2]}), (std::vector<double>{0.5, 0.3, 0.2}));
  // tests/oracles/oracle_values.py
  EXPECT_NEAR(f[3], 1.0296530140645737, 1e-12);
  EXPECT_THROW(extract_features_t2(Distribution::uniform(2), 3), ArgumentError);
}

TEST(ShouldStop, ThresholdRule) {
  EXPECT_TRUE(should_stop(std::vector<double>{0.1, 0.2, 0.39}, 0.4));
  EXPECT_FALSE(should_stop(std::vector<double>{0.1, 0.9}, 0.4));
  EXPECT_FALSE(should_stop(std::vector<double>{0.4}, 0.4));
  EXPECT_TRUE(should_stop(std::vector<double>{0.3999999}));
  EXPECT_THROW(should_stop(std::vector<double>{}, 0.4), ArgumentError);
  EXPECT_THROW(should_stop(DecisionModel::constant(0.0), std::vector<DraftFeatures>{}, 0.4), ArgumentError);
}

TEST(ShouldStop, MonotoneInScores) {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> s(1 + rng.below(6));
    for (double& x : s) x = rng.uniform();
    const double beta = rng.uniform();
    const bool before = should_stop(s, beta);
    s[rng.below(s.size())] += rng.uniform();
    if (!before) ASSERT_FALSE(should_stop(s, beta));
  }
}

TEST(DecisionModel, KindsAndOutputRange) {
  const DecisionModel t2{DecisionT2(3, 5)};
  EXPECT_EQ(t2.kind(), "t2");
  EXPECT_EQ(t2.required_hidden_dim(), 0u);
  EXPECT_FALSE(t2.is_constant());
  const DecisionModel t1{DecisionT1(6, 5)};
  EXPECT_EQ(t1.kind(), "t1");
  EXPECT_EQ(t1.required_hidden_dim(), 6u);
  const DecisionModel c = DecisionModel::constant(0.7);
  EXPECT_EQ(c.kind(), "constant");
  EXPECT_TRUE(c.is_constant());
  EXPECT_EQ(c.score({}), 0.7);

  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x(4);
    for (double& v : x) v = 50.0 * rng.normal();
    const double s = t2.score_features(x);
    ASSERT_TRUE(std::isfinite(s));
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
  }
  const DraftFeatures f{{}, Distribution({0.6, 0.3, 0.1})};
  EXPECT_EQ(t2.featurize(f), extract_features_t2(f.draft_dist, 3));
  const auto batch = t2.score_batch(std::vector<DraftFeatures>{f, f});
  EXPECT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[0], t2.score(f));
}

std::vector<TrainSample> separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool accept = i % 2 == 0;
    const double top = accept ? 0.85 : 0.35;
    const double ent = accept ? 0.4 : 1.6;
    out.push_back({{top + 0.05 * rng.normal(), (1.0 - top) / 2 + 0.02 * rng.normal(), ent + 0.1 * rng.normal()},
                   accept ? 1.0 : 0.0,
                   i});
  }
  return out;
}

TEST(Training, SeparableFixtureReachesHighAccuracy) {
  const auto samples = separable(400, 1);
  DecisionModel m{DecisionT2(2, 7)};
  const auto curve = train(m, samples, {60, 0.5, 16, 3});
  ASSERT_EQ(curve.size(), 60u);
  EXPECT_LT(curve.back(), curve.front());
  EXPECT_GT(accuracy(m, samples), 0.95);
  EXPECT_GT(accuracy(m, separable(200, 2)), 0.95);
  const ScoreHistogram h = score_histogram(m, samples);
  EXPECT_EQ(h.accepted.size(), 10u);
  EXPECT_LT(h.overlap, 0.2);
}

TEST(Training, DeterministicUnderSeed) {
  const auto samples = separable(100, 5);
  DecisionModel a{DecisionT2(2, 7)};
  DecisionModel b{DecisionT2(2, 7)};
  EXPECT_EQ(train(a, samples, {5, 0.5, 8, 9}), train(b, samples, {5, 0.5, 8, 9}));
  for (const auto& s : samples) ASSERT_EQ(a.score_features(s.features), b.score_features(s.features));
}

TEST(Training, ZeroEpochsLeavesModelUnchanged) {
  const auto samples = separable(50, 6);
  DecisionModel m{DecisionT2(2, 7)};
  const DecisionModel before = m;
  EXPECT_TRUE(train(m, samples, {0, 0.5, 8, 1}).empty());
  for (const auto& s : samples) ASSERT_EQ(m.score_features(s.features), before.score_features(s.features));
  DecisionModel c = DecisionModel::constant(0.3);
  EXPECT_TRUE(train(c, samples).empty());
}

TEST(Training, ConstantLabelsGiveConstantPredictor) {
  auto samples = separable(100, 7);
  for (auto& s : samples) s.label = 1.0;
  DecisionModel m{DecisionT2(2, 7)};
  train(m, samples, {80, 0.5, 16, 1});
  for (const auto& s : samples) ASSERT_GT(m.score_features(s.features), 0.95);
}

TEST(Training, T1RegressesRatioLabel) {
  Rng rng(8);
  std::vector<TrainSample> samples;
  for (std::size_t i = 0; i < 300; ++i) {
    std::vector<double> h(4);
    for (double& v : h) v = rng.normal();
    samples.push_back({h, h[0] > 0 ? 0.9 : 0.1, i});
  }
  DecisionModel m{DecisionT1(4, 2)};
  const auto curve = train(m, samples, {40, 0.5, 16, 2});
  EXPECT_LT(curve.back(), 0.5 * curve.front());
  EXPECT_GT(accuracy(m, samples), 0.9);
}

TEST(Weights, RoundTripPreservesScores) {
  Rng rng(9);
  for (const DecisionModel& m : {DecisionModel(DecisionT1(5, 1, RatioLabel::kVerbatimMax)),
                                 DecisionModel(DecisionT2(3, 2)), DecisionModel::constant(0.25)}) {
    const DecisionModel back = DecisionModel::from_weights(m.to_weights());
    EXPECT_EQ(back.kind(), m.kind());
    const std::size_t dim = m.kind() == "t1" ? 5 : m.kind() == "t2" ? 4 : 0;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> x(dim);
      for (double& v : x) v = rng.normal();
      ASSERT_EQ(back.score_features(x), m.score_features(x));
    }
  }
  const DecisionModel verbatim{DecisionT1(5, 1, RatioLabel::kVerbatimMax)};
  const DecisionModel back = DecisionModel::from_weights(verbatim.to_weights());
  EXPECT_EQ(std::get<DecisionT1>(back.impl()).label(), RatioLabel::kVerbatimMax);
}

// ---------------------------------------------------------------- data collection

std::vector<TokenSeq> prompts(std::size_t n, std::size_t vocab) {
  std::vector<TokenSeq> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({static_cast<TokenId>(i % vocab), static_cast<TokenId>((3 * i) % vocab)});
  }
  return out;
}

TEST(Collect, DraftEqualsTargetLabelsAllAccepted) {
  const TabularModel m = make_synthetic_target({8, 1, 2.0, 3});
  EngineConfig cfg;
  cfg.method = McsdMethod{TreeConfig::fork(2, 3)};
  cfg.max_new_tokens = 30;
  const auto samples = collect_training_data(m, m, prompts(5, 8), cfg);
  ASSERT_FALSE(samples.empty());
  for (const auto& s : samples) {
    ASSERT_EQ(s.label, 1.0);
    ASSERT_EQ(s.features.size(), DecisionT2::kDefaultTopK + 1);
  }
}

TEST(Collect, ImpossibleDraftTokensLabelledRejected) {
  const TabularModel target = table(2, 1, {{{}, {1.0, 0.0}}});
  const TabularModel draft = table(2, 1, {{{}, {0.0, 1.0}}});
  EngineConfig cfg;
  cfg.method = BaselineSdMethod{3};
  cfg.max_new_tokens = 10;
  CollectOptions opts;
  opts.top_k = 2;
  const auto samples = collect_training_data(draft, target, prompts(3, 2), cfg, opts);
  ASSERT_EQ(samples.size(), 90u);
  for (const auto& s : samples) ASSERT_EQ(s.label, 0.0);
}

TEST(Collect, SampleCountMatchesTraceCounter) {
  const TabularModel target = make_synthetic_target({10, 1, 2.0, 5});
  const TabularModel draft = smoothed_draft(target, 2.0);
  EngineConfig cfg;
  cfg.method = McsdMethod{TreeConfig::fork(2, 4)};
  cfg.max_new_tokens = 20;
  cfg.seed = 12;
  const auto ps = prompts(100, 10);
  CollectOptions opts;
  opts.balance = false;
  const auto samples = collect_training_data(draft, target, ps, cfg, opts);
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EngineConfig c = cfg;
    c.seed = session_seed(cfg.seed, i);
    for (const auto& rec : run_generation(c, draft, target, ps[i]).trace) expected += rec.draft_tokens;
  }
  EXPECT_EQ(samples.size(), expected);

  opts.balance = true;
  const auto balanced = collect_training_data(draft, target, ps, cfg, opts);
  std::size_t pos = 0;
  for (const auto& s : balanced) pos += s.label == 1.0;
  EXPECT_EQ(2 * pos, balanced.size());
}

TEST(Collect, Errors) {
  const TabularModel m(4, 1);
  EngineConfig cfg;
  cfg.method = BaselineSdMethod{2};
  EXPECT_THROW(collect_training_data(m, m, {}, cfg), ArgumentError);
}

TEST(Collect, SamplesSerializeAsJsonLines) {
  std::stringstream ss;
  write_samples(ss, {{{0.5, 1.0}, 1.0, 3}, {{0.25, 0.0}, 0.0, 4}});
  std::string line;
  std::size_t lines = 0;
  while (std::getline(ss, line)) {
    ++lines;
    EXPECT_NE(line.find("\"step_id\""), std::string::npos);
  }
  EXPECT_EQ(lines, 2u);
}

}  // namespace
}  // namespace mcsd
