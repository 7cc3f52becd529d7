#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "mcsd/error.hpp"
#include "mcsd/model/sampling.hpp"
#include "mcsd/model/synthetic.hpp"
#include "mcsd/model/tabular_model.hpp"
#include "mcsd/model/tiny_neural.hpp"
#include "mcsd/model/vocabulary.hpp"
#include "mcsd/model/weight_file.hpp"
#include "mcsd/tree/token_tree.hpp"
#include "mcsd/tree/topology_mask.hpp"

namespace mcsd {
namespace {

using testing::random_table;
using testing::table;

void expect_probs(const Distribution& d, const std::vector<double>& want, double tol = 1e-12) {
  ASSERT_EQ(d.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(d.probs()[i], want[i], tol) << "entry " << i;
}

TEST(Vocabulary, RejectsTinySizes) {
  EXPECT_THROW(Vocabulary(1), ConfigError);
  EXPECT_EQ(Vocabulary(3).size(), 3u);
  EXPECT_EQ(Vocabulary(2, {"a", "b"}).display(1), "b");
}

TEST(Distribution, ValidatesEntriesAndMass) {
  EXPECT_THROW(Distribution({0.5, 0.6}), ArgumentError);
  EXPECT_THROW(Distribution({1.5, -0.5}), ArgumentError);
  EXPECT_THROW(Distribution({std::nan(""), 1.0}), ArgumentError);
  EXPECT_NO_THROW(Distribution({0.5, 0.5 + 1e-10}));
  EXPECT_THROW(Distribution::normalized({0.0, 0.0}), ArgumentError);
  EXPECT_EQ(Distribution::one_hot(3, 2).argmax(), 2);
  EXPECT_EQ(Distribution({0.4, 0.4, 0.2}).argmax(), 0);
  EXPECT_DOUBLE_EQ(total_variation(Distribution({1, 0}), Distribution({0, 1})), 1.0);
}

TEST(ApplyTemperature, Examples) {
  expect_probs(apply_temperature(std::vector<double>{1, 1, 1}, 0.7), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  expect_probs(apply_temperature(std::vector<double>{2, 1, 0}, 0.0), {1, 0, 0});
  // softmax([ln 2, 0, 0]) from tests/oracles/oracle_values.py
  expect_probs(apply_temperature(std::vector<double>{std::log(2.0), 0, 0}, 1.0), {0.5, 0.25, 0.25});
}

TEST(ApplyTemperature, ArgmaxTiesPickLowestId) {
  expect_probs(apply_temperature(std::vector<double>{0, 3, 3}, 0.0), {0, 1, 0});
}

TEST(ApplyTemperature, Errors) {
  EXPECT_THROW(apply_temperature(std::vector<double>{1, 2}, -0.1), ArgumentError);
  EXPECT_THROW(apply_temperature(std::vector<double>{1, std::nan("")}, 1.0), ArgumentError);
  const double inf = std::numeric_limits<double>::infinity();
  expect_probs(apply_temperature(std::vector<double>{0, -inf}, 1.0), {1, 0});
}

TEST(ApplyTemperature, PropertyValidAndSmallTemperatureLimit) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(2 + rng.below(6));
    for (double& l : logits) l = 4.0 * rng.normal();
    const double t = 0.05 + 3.0 * rng.uniform();
    EXPECT_NO_THROW(apply_temperature(logits, t));
    const Distribution cold = apply_temperature(logits, 1e-3);
    const Distribution zero = apply_temperature(logits, 0.0);
    std::vector<double> sorted = logits;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] > 0.1) {
      EXPECT_LT(total_variation(cold, zero), 1e-9);
    }
  }
}

TEST(Sample, OneHotAndDeterminism) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(Distribution({0, 1, 0}), rng), 1);
  Rng a(42);
  Rng b(42);
  const Distribution u = Distribution::uniform(4);
  EXPECT_EQ(sample(u, a), sample(u, b));
}

TEST(Sample, FrequencyMatches) {
  Rng rng(7);
  const Distribution d({0.5, 0.5, 0.0});
  int zeros = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const TokenId t = sample(d, rng);
    ASSERT_NE(t, 2);
    zeros += t == 0 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.5, 0.01);
}

TEST(Residual, Examples) {
  expect_probs(*residual_distribution(Distribution({0.6, 0.4}), Distribution({0.2, 0.8})), {1.0, 0.0});
  EXPECT_FALSE(residual_distribution(Distribution({0.5, 0.5}), Distribution({0.5, 0.5})).has_value());
  expect_probs(residual_or_target(Distribution({0.5, 0.5}), Distribution({0.5, 0.5})), {0.5, 0.5});
  expect_probs(*residual_distribution(Distribution({1, 0}), Distribution({0, 1})), {1, 0});
}

TEST(Residual, PropertyValidWheneverDistinct) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t v = 2 + rng.below(5);
    const Distribution p = testing::random_dist(rng, v);
    const Distribution q = testing::random_dist(rng, v);
    if (p == q) continue;
    const auto r = residual_distribution(p, q);
    if (!r) continue;  // residual mass below the epsilon
    for (std::size_t i = 0; i < v; ++i) {
      if (p.probs()[i] <= q.probs()[i]) EXPECT_EQ(r->probs()[i], 0.0);
    }
  }
}

TEST(SampleWithoutReplacement, DistinctAndStopsAtSupport) {
  Rng rng(3);
  const TokenSeq s = sample_without_replacement(Distribution({0.5, 0.0, 0.5}), 3, rng);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NE(s[0], s[1]);
  EXPECT_EQ(top_tokens(Distribution({0.2, 0.4, 0.4, 0.0}), 4), (TokenSeq{1, 2, 0}));
}

TEST(TabularModel, LookupAndBackoff) {
  TabularModel m = table(3, 2, {{{0}, {0.5, 0.5, 0}}, {{0, 1}, {0, 0, 1}}, {{}, {0.2, 0.3, 0.5}}});
  const auto softmax = [&](TokenSeq ctx) { return apply_temperature(m.next(ctx).logits, 1.0); };
  expect_probs(softmax({0}), {0.5, 0.5, 0});
  expect_probs(softmax({2, 0}), {0.5, 0.5, 0});
  expect_probs(softmax({0, 1}), {0, 0, 1});
  expect_probs(softmax({1}), {0.2, 0.3, 0.5});
  EXPECT_TRUE(m.next(TokenSeq{0}).hidden.empty());
  EXPECT_THROW(m.set_row(TokenSeq{0, 1, 2}, Distribution::uniform(3)), ArgumentError);
  EXPECT_THROW(m.set_row(TokenSeq{5}, Distribution::uniform(3)), ArgumentError);
}

TEST(TabularModel, RoundTripAndParseErrors) {
  Rng rng(9);
  const TabularModel m = random_table(rng, 4);
  std::stringstream buf;
  m.write(buf);
  const TabularModel back = TabularModel::read(buf);
  ASSERT_EQ(back.rows().size(), m.rows().size());
  for (const auto& [ctx, row] : m.rows()) EXPECT_EQ(back.rows().at(ctx), row);

  std::istringstream bad("vocab=2 order=1\n0 | 0.5 0.5\n1 | 0.5\n");
  try {
    TabularModel::read(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream no_header("0 | 1 0\n");
  EXPECT_THROW(TabularModel::read(no_header), ParseError);
}

TEST(Forward, SingleNodeIsTableLookup) {
  const TabularModel m = table(3, 1, {{{0}, {0.5, 0.5, 0}}});
  const TokenTree tree = TokenTree::from_parents(std::vector<int>{-1}, TokenSeq{0});
  const TopologyMask mask(tree);
  const auto pos = position_indices(tree, 1);
  const ForwardResult r = forward(m, TokenSeq{2}, tree.tokens(), mask, pos);
  expect_probs(apply_temperature(r.nodes[0].logits, 1.0), {0.5, 0.5, 0});
}

TEST(Forward, EmptyTreeGivesRootOnly) {
  const TabularModel m = table(3, 1, {{{1}, {0.1, 0.2, 0.7}}});
  const TopologyMask mask(TokenTree{});
  const ForwardResult r = forward(m, TokenSeq{0, 1}, {}, mask, {});
  EXPECT_TRUE(r.nodes.empty());
  EXPECT_EQ(r.root.logits, m.next(TokenSeq{0, 1}).logits);
}

TEST(Forward, DimensionMismatchIsConfigError) {
  const TabularModel m = table(3, 1, {});
  const TokenTree tree = TokenTree::from_parents(std::vector<int>{-1, 0}, TokenSeq{0, 1});
  const TopologyMask mask(tree);
  EXPECT_THROW(forward(m, TokenSeq{0}, TokenSeq{0}, mask, std::vector<std::size_t>{1, 2}), ConfigError);
  EXPECT_THROW(forward(m, TokenSeq{0}, tree.tokens(), mask, std::vector<std::size_t>{1, 1}), ConfigError);
}

TEST(Forward, ForkMatchesPerPathOnNeuralModel) {
  TinyNeuralModel m(5, 2, 8, 3);
  const TokenTree tree = build_tree_shape(TreeConfig::fork(2, 1)).tree;
  TokenTree t = tree;
  t.set_token(0, 3);
  t.set_token(1, 4);
  const TopologyMask mask(t);
  const TokenSeq prefix{1, 2};
  const ForwardResult r = forward(m, prefix, t.tokens(), mask, position_indices(t, prefix.size()));
  ASSERT_EQ(r.nodes.size(), 2u);
  EXPECT_EQ(r.nodes[0].logits, m.next(TokenSeq{1, 2, 3}).logits);
  EXPECT_EQ(r.nodes[1].hidden, m.next(TokenSeq{1, 2, 4}).hidden);
  EXPECT_EQ(r.nodes[0].hidden.size(), 8u);
}

// Masked evaluation equals per-path evaluation on random trees up to 12 nodes.
TEST(Forward, PropertyTreeEquivalence) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    // Random parent links, then relabelled into breadth-first order.
    std::vector<int> bfs_parents{-1};
    for (std::size_t i = 1; i < n; ++i) {
      bfs_parents.push_back(rng.below(4) == 0 ? -1 : static_cast<int>(rng.below(i)));
    }
    std::vector<int> depth(n, 1);
    for (std::size_t i = 1; i < n; ++i)
      depth[i] = bfs_parents[i] < 0 ? 1 : depth[static_cast<std::size_t>(bfs_parents[i])] + 1;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return depth[a] < depth[b]; });
    std::vector<int> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = static_cast<int>(k);
    std::vector<int> sorted_parents(n);
    TokenSeq tokens(n);
    for (std::size_t k = 0; k < n; ++k) {
      const int p = bfs_parents[order[k]];
      sorted_parents[k] = p < 0 ? -1 : rank[static_cast<std::size_t>(p)];
      tokens[k] = static_cast<TokenId>(rng.below(4));
    }
    const TokenTree tree = TokenTree::from_parents(sorted_parents, tokens);
    const TabularModel m = random_table(rng, 4);
    TabularModel m2(4, 2);
    for (const auto& [ctx, row] : m.rows()) m2.set_row(ctx, row);
    m2.set_row(TokenSeq{1, 2}, Distribution({0.1, 0.2, 0.3, 0.4}));
    const TokenSeq prefix{static_cast<TokenId>(rng.below(4))};
    const ForwardResult r = forward(m2, prefix, tokens, TopologyMask(tree), position_indices(tree, 1));
    for (std::size_t j = 0; j < n; ++j) {
      TokenSeq ctx = prefix;
      for (int a : tree.path_to(j)) ctx.push_back(tokens[static_cast<std::size_t>(a)]);
      ASSERT_EQ(r.nodes[j].logits, m2.next(ctx).logits) << "trial " << trial << " node " << j;
    }
  }
}

TEST(TinyNeural, TrainingReducesLossAndRoundTrips) {
  const TabularModel target = make_synthetic_target({6, 1, 3.0, 4});
  Rng rng(2);
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < 60; ++i) {
    TokenSeq s{static_cast<TokenId>(rng.below(6))};
    const TokenSeq rest = sample_continuation(target, s, 20, 1.0, rng);
    s.insert(s.end(), rest.begin(), rest.end());
    corpus.push_back(s);
  }
  TinyNeuralModel m(6, 1, 12, 5);
  const auto curve = m.train(corpus, {8, 0.05, 1});
  ASSERT_EQ(curve.size(), 8u);
  EXPECT_LT(curve.back(), curve.front());

  std::stringstream buf;
  m.to_weights().write(buf);
  const TinyNeuralModel back = TinyNeuralModel::from_weights(WeightFile::read(buf));
  EXPECT_EQ(back.next(TokenSeq{1, 2}).logits, m.next(TokenSeq{1, 2}).logits);
  EXPECT_EQ(back.hidden_dim(), 12u);
}

TEST(WeightFile, ShapeAndParseErrors) {
  WeightFile wf;
  wf.set_meta("kind", "test");
  wf.add("w", Eigen::MatrixXd::Identity(2, 3));
  std::stringstream buf;
  wf.write(buf);
  const WeightFile back = WeightFile::read(buf);
  EXPECT_EQ(back.require_meta("kind"), "test");
  EXPECT_EQ(back.matrix("w", 2, 3), Eigen::MatrixXd::Identity(2, 3));
  EXPECT_THROW(back.matrix("w", 3, 2), ParseError);
  EXPECT_THROW(back.matrix("missing"), ParseError);
  std::istringstream bad("meta kind x\ntensor w 1 2\n1.0\n");
  try {
    WeightFile::read(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Synthetic, DraftsStayValidAndDiffer) {
  const TabularModel target = make_synthetic_target({8, 2, 2.0, 3});
  const TabularModel smooth = smoothed_draft(target, 2.0);
  const TabularModel noisy = noisy_draft(target, 0.5, 4);
  const TokenSeq ctx{1, 2};
  const Distribution p = target.row_for(ctx);
  EXPECT_GT(total_variation(p, smooth.row_for(ctx)), 0.0);
  EXPECT_GT(total_variation(p, noisy.row_for(ctx)), 0.0);
  EXPECT_LT(smooth.row_for(ctx).probs()[static_cast<std::size_t>(p.argmax())],
            p.probs()[static_cast<std::size_t>(p.argmax())]);
  EXPECT_LT(total_variation(smoothed_draft(target, 1.0).row_for(ctx), p), 1e-12);
  EXPECT_THROW(make_synthetic_target({8, 9, 2.0, 1}), ConfigError);
}

}  // namespace
}  // namespace mcsd
