#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcsd/tree/tree_config.hpp"
#include "mcsd/types.hpp"

namespace mcsd {

struct TreeNode {
  TokenId token = kNoToken;
  int parent = -1;  // -1 for depth-1 nodes
  int depth = 1;
  std::vector<int> children;
};

/// Flat token tree in breadth-first topological order: parents precede
/// children and depths are non-decreasing along the node list.
class TokenTree {
 public:
  TokenTree() = default;

  /// Builds from parent links (-1 = root). Throws ConfigError unless every
  /// parent index precedes its child and depths are non-decreasing.
  static TokenTree from_parents(std::span<const int> parents, TokenSpan tokens = {});

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  std::span<const int> roots() const noexcept { return roots_; }
  int max_depth() const noexcept { return nodes_.empty() ? 0 : nodes_.back().depth; }

  void set_token(std::size_t i, TokenId token) { nodes_.at(i).token = token; }
  TokenSeq tokens() const;

  /// Node indices from the depth-1 ancestor down to `i`.
  std::vector<int> path_to(std::size_t i) const;
  /// Number of nodes with depth <= `depth` (a prefix of the node list).
  std::size_t count_up_to_depth(int depth) const noexcept;
  /// Nodes per depth, index 0 = depth 1.
  std::vector<std::size_t> level_counts() const;
  /// The tree restricted to nodes of depth <= `depth`.
  TokenTree truncated(int depth) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<int> roots_;
};

struct TreeShape {
  TokenTree tree;
  std::vector<std::size_t> level_counts;
  std::size_t node_count = 0;
  std::size_t init_nodes = 0;
  std::size_t draft_nodes = 0;
  /// Draft nodes beneath each init token (all draft nodes when draft-initialized).
  std::size_t draft_nodes_per_init = 0;
  /// Root-to-leaf candidate sequences.
  std::size_t leaf_sequences = 0;
};

/// Skeleton (tokens unset) for a validated config.
TreeShape build_tree_shape(const TreeConfig& config);

/// prefix_len + depth - 1 per node; siblings share a position.
std::vector<std::size_t> position_indices(const TokenTree& tree, std::size_t prefix_len);

struct MaskGrowth {
  std::size_t nodes = 0;
  std::size_t cells = 0;
  friend bool operator==(const MaskGrowth&, const MaskGrowth&) = default;
};

/// Closed-form node and mask-cell counts: W*D for forks,
/// b + b^2 + ... + b^D for uniform expansion.
MaskGrowth mask_growth_fork(int width, int depth);
MaskGrowth mask_growth_uniform(int branching, int depth);
MaskGrowth mask_growth(const TreeConfig& config);

}  // namespace mcsd
