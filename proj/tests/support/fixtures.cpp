#include "fixtures.hpp"

#include "mcsd/tree/token_tree.hpp"

namespace mcsd::testing {

TabularModel table(std::size_t vocab, int order, const std::vector<Row>& rows) {
  TabularModel m(vocab, order);
  for (const auto& [ctx, probs] : rows) m.set_row(ctx, Distribution(probs));
  return m;
}

Distribution random_dist(Rng& rng, std::size_t vocab, double zero_prob) {
  std::vector<double> w(vocab);
  double total = 0.0;
  for (double& x : w) {
    x = rng.uniform() < zero_prob ? 0.0 : 0.05 + rng.uniform();
    total += x;
  }
  if (total == 0.0) w[rng.below(vocab)] = 1.0;
  return Distribution::normalized(std::move(w));
}

TabularModel random_table(Rng& rng, std::size_t vocab) {
  TabularModel m(vocab, 1);
  m.set_row({}, random_dist(rng, vocab));
  for (std::size_t t = 0; t < vocab; ++t) m.set_row(TokenSeq{static_cast<TokenId>(t)}, random_dist(rng, vocab));
  return m;
}

TreeConfig random_tree(Rng& rng, std::size_t max_nodes) {
  while (true) {
    TreeConfig c;
    if (rng.below(3) == 0) {
      const int w = 1 + static_cast<int>(rng.below(3));
      const int d = 1 + static_cast<int>(rng.below(3));
      c = TreeConfig::fork(w, d);
    } else {
      std::vector<int> b;
      const std::size_t levels = 1 + rng.below(3);
      for (std::size_t l = 0; l < levels; ++l) b.push_back(1 + static_cast<int>(rng.below(3)));
      c = TreeConfig::expansion(b);
    }
    if (build_tree_shape(c).node_count <= max_nodes) return c;
  }
}

ModelPair2 divergence_pair() {
  return {table(2, 1, {{{0}, {0.6, 0.4}}, {{1}, {0.9, 0.1}}}), table(2, 1, {{{0}, {0.3, 0.7}}, {{1}, {0.1, 0.9}}})};
}

}  // namespace mcsd::testing
