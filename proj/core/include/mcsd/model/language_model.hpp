#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcsd/model/vocabulary.hpp"
#include "mcsd/tree/topology_mask.hpp"
#include "mcsd/types.hpp"

namespace mcsd {

/// Next-token output at one position.
struct TokenOutput {
  std::vector<double> logits;  // length = vocabulary size; -inf = impossible
  std::vector<double> hidden;  // length = model hidden size (0 for tables)
};

/// Autoregressive next-token model. Implementations are immutable once built
/// and may be shared by concurrent sessions.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocabulary() const noexcept = 0;
  virtual std::size_t hidden_dim() const noexcept = 0;
  virtual std::string kind() const = 0;

  /// Output for the token following `context`.
  virtual TokenOutput next(TokenSpan context) const = 0;

  std::size_t vocab_size() const noexcept { return vocabulary().size(); }
};

/// Tree-masked batch evaluation. `root` is the output at the last prefix
/// position; `nodes[j]` is the output after the root-to-j path selected by
/// mask row j, prepended by the prefix.
struct ForwardResult {
  TokenOutput root;
  std::vector<TokenOutput> nodes;
};

/// Throws ConfigError when the mask, token and position counts disagree or a
/// position does not match its node's depth.
ForwardResult forward(const LanguageModel& model, TokenSpan prefix, TokenSpan tree_tokens, const MaskSlice& mask,
                      std::span<const std::size_t> positions);
ForwardResult forward(const LanguageModel& model, TokenSpan prefix, TokenSpan tree_tokens, const TopologyMask& mask,
                      std::span<const std::size_t> positions);

}  // namespace mcsd
