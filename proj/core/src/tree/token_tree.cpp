#include "mcsd/tree/token_tree.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mcsd/error.hpp"

namespace mcsd {

TokenTree TokenTree::from_parents(std::span<const int> parents, TokenSpan tokens) {
  if (!tokens.empty() && tokens.size() != parents.size()) {
    throw ConfigError(fmt::format("{} tokens for {} nodes", tokens.size(), parents.size()));
  }
  TokenTree tree;
  tree.nodes_.resize(parents.size());
  int previous_depth = 1;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const int parent = parents[i];
    TreeNode& node = tree.nodes_[i];
    node.parent = parent;
    node.token = tokens.empty() ? kNoToken : tokens[i];
    if (parent < 0) {
      node.parent = -1;
      node.depth = 1;
      tree.roots_.push_back(static_cast<int>(i));
    } else {
      if (static_cast<std::size_t>(parent) >= i) {
        throw ConfigError(fmt::format("node {} has parent {} that does not precede it", i, parent));
      }
      node.depth = tree.nodes_[static_cast<std::size_t>(parent)].depth + 1;
      tree.nodes_[static_cast<std::size_t>(parent)].children.push_back(static_cast<int>(i));
    }
    if (node.depth < previous_depth) {
      throw ConfigError(fmt::format("node {} breaks breadth-first order", i));
    }
    previous_depth = node.depth;
  }
  return tree;
}

TokenSeq TokenTree::tokens() const {
  TokenSeq out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.token);
  return out;
}

std::vector<int> TokenTree::path_to(std::size_t i) const {
  std::vector<int> path;
  for (int cur = static_cast<int>(i); cur >= 0; cur = nodes_.at(static_cast<std::size_t>(cur)).parent) {
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::size_t TokenTree::count_up_to_depth(int depth) const noexcept {
  const auto it =
      std::partition_point(nodes_.begin(), nodes_.end(), [depth](const TreeNode& n) { return n.depth <= depth; });
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::vector<std::size_t> TokenTree::level_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_depth()), 0);
  for (const auto& n : nodes_) ++counts[static_cast<std::size_t>(n.depth - 1)];
  return counts;
}

TokenTree TokenTree::truncated(int depth) const {
  const std::size_t n = count_up_to_depth(depth);
  std::vector<int> parents;
  TokenSeq toks;
  for (std::size_t i = 0; i < n; ++i) {
    parents.push_back(nodes_[i].parent);
    toks.push_back(nodes_[i].token);
  }
  return from_parents(parents, toks);
}

TreeShape build_tree_shape(const TreeConfig& config) {
  config.validate();
  const auto levels = config.level_branching();
  std::vector<int> parents;
  std::vector<int> frontier{-1};
  for (int branching : levels) {
    std::vector<int> next;
    for (int parent : frontier) {
      for (int c = 0; c < branching; ++c) {
        next.push_back(static_cast<int>(parents.size()));
        parents.push_back(parent);
      }
    }
    frontier = std::move(next);
  }
  TreeShape shape;
  shape.tree = TokenTree::from_parents(parents);
  shape.level_counts = shape.tree.level_counts();
  shape.node_count = shape.tree.size();
  shape.leaf_sequences = frontier.size();
  shape.init_nodes = config.target_initialized() ? shape.level_counts.front() : 0;
  shape.draft_nodes = shape.node_count - shape.init_nodes;
  shape.draft_nodes_per_init = shape.init_nodes == 0 ? shape.draft_nodes : shape.draft_nodes / shape.init_nodes;
  return shape;
}

std::vector<std::size_t> position_indices(const TokenTree& tree, std::size_t prefix_len) {
  std::vector<std::size_t> positions;
  positions.reserve(tree.size());
  for (const auto& n : tree.nodes()) positions.push_back(prefix_len + static_cast<std::size_t>(n.depth - 1));
  return positions;
}

MaskGrowth mask_growth_fork(int width, int depth) {
  if (width < 1 || depth < 1) throw ArgumentError("fork growth needs W>=1 and D>=1");
  const auto nodes = static_cast<std::size_t>(width) * static_cast<std::size_t>(depth);
  return {nodes, nodes * nodes};
}

MaskGrowth mask_growth_uniform(int branching, int depth) {
  if (branching < 1 || depth < 1) throw ArgumentError("expansion growth needs b>=1 and D>=1");
  std::size_t nodes = 0;
  std::size_t level = 1;
  for (int d = 0; d < depth; ++d) {
    level *= static_cast<std::size_t>(branching);
    nodes += level;
  }
  return {nodes, nodes * nodes};
}

MaskGrowth mask_growth(const TreeConfig& config) {
  config.validate();
  std::size_t nodes = 0;
  std::size_t level = 1;
  for (int k : config.level_branching()) {
    level *= static_cast<std::size_t>(k);
    nodes += level;
  }
  return {nodes, nodes * nodes};
}

}  // namespace mcsd
