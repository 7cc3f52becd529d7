#include "mcsd/model/language_model.hpp"

#include <fmt/format.h>

#include "mcsd/error.hpp"

namespace mcsd {

ForwardResult forward(const LanguageModel& model, TokenSpan prefix, TokenSpan tree_tokens, const MaskSlice& mask,
                      std::span<const std::size_t> positions) {
  const std::size_t n = mask.size();
  if (tree_tokens.size() != n || positions.size() != n) {
    throw ConfigError(fmt::format("forward: mask is {0}x{0} but got {1} tokens and {2} positions", n,
                                  tree_tokens.size(), positions.size()));
  }
  ForwardResult result;
  result.root = model.next(prefix);
  result.nodes.reserve(n);
  TokenSeq context;
  for (std::size_t j = 0; j < n; ++j) {
    if (!mask(j, j)) throw ConfigError(fmt::format("forward: mask diagonal unset at {}", j));
    context.assign(prefix.begin(), prefix.end());
    for (std::size_t i = 0; i <= j; ++i) {
      if (mask(j, i)) context.push_back(tree_tokens[i]);
    }
    for (std::size_t i = j + 1; i < n; ++i) {
      if (mask(j, i)) throw ConfigError(fmt::format("forward: node {} attends to later node {}", j, i));
    }
    const std::size_t depth = context.size() - prefix.size();
    if (positions[j] != prefix.size() + depth - 1) {
      throw ConfigError(fmt::format("forward: node {} at depth {} has position {}, expected {}", j, depth, positions[j],
                                    prefix.size() + depth - 1));
    }
    result.nodes.push_back(model.next(context));
  }
  return result;
}

ForwardResult forward(const LanguageModel& model, TokenSpan prefix, TokenSpan tree_tokens, const TopologyMask& mask,
                      std::span<const std::size_t> positions) {
  return forward(model, prefix, tree_tokens, mask.full(), positions);
}

}  // namespace mcsd
