#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mcsd {

/// Every level-l node has branching[l] children; the first entry counts the
/// children of the (virtual) root.
struct ExpansionShape {
  std::vector<int> branching;
};

/// `width` independent chains of `depth` draft tokens.
struct ForkShape {
  int width = 1;
  int depth = 1;
};

/// Token-tree skeleton description.
///
/// With `target_init_width` >= 1 the first tree level holds tokens sampled
/// from the target model instead of the draft model. For an expansion shape
/// the first branching entry is that width; a fork shape keeps its `depth`
/// draft levels and gains one init level whose width equals the fork width.
struct TreeConfig {
  std::variant<ExpansionShape, ForkShape> shape = ExpansionShape{{1}};
  int target_init_width = 0;

  static TreeConfig expansion(std::vector<int> branching, bool target_init = false);
  static TreeConfig fork(int width, int depth, bool target_init = false);

  /// Throws ConfigError when the shape or init width is invalid.
  void validate() const;

  bool is_fork() const noexcept { return std::holds_alternative<ForkShape>(shape); }
  bool target_initialized() const noexcept { return target_init_width > 0; }

  /// Children per parent, one entry per tree level (init level included).
  std::vector<int> level_branching() const;
  /// Tree levels that are sampled by the draft model.
  int draft_levels() const;

  /// "2,4,3,1,1" or "fork:W=16,D=5".
  std::string to_string() const;

  friend bool operator==(const TreeConfig& a, const TreeConfig& b);
};

/// Parses "2,4,3,1,1" or "fork:W=16,D=5". With `target_init` the first
/// expansion entry (or the fork width) becomes the target-init width.
TreeConfig parse_tree_config(std::string_view text, bool target_init = false);

}  // namespace mcsd
