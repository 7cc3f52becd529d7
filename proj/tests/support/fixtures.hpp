#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mcsd/model/distribution.hpp"
#include "mcsd/model/rng.hpp"
#include "mcsd/model/tabular_model.hpp"
#include "mcsd/tree/tree_config.hpp"

namespace mcsd::testing {

using Row = std::pair<TokenSeq, std::vector<double>>;

TabularModel table(std::size_t vocab, int order, const std::vector<Row>& rows);

/// Random distribution; each entry is zeroed with `zero_prob` but at least
/// one entry stays positive.
Distribution random_dist(Rng& rng, std::size_t vocab, double zero_prob = 0.25);

/// Order-1 table with a random row for the empty context and every token.
TabularModel random_table(Rng& rng, std::size_t vocab);

/// Random draft-initialized tree with at most `max_nodes` nodes.
TreeConfig random_tree(Rng& rng, std::size_t max_nodes);

/// Vocab-2 pair where the init token 0 subtree is accepted far more often
/// than the token 1 subtree. Prefix {0} gives p = [0.6, 0.4].
struct ModelPair2 {
  TabularModel target;
  TabularModel draft;
};
ModelPair2 divergence_pair();

}  // namespace mcsd::testing
