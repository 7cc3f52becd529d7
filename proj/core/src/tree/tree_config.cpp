#include "mcsd/tree/tree_config.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <charconv>

#include "mcsd/error.hpp"

namespace mcsd {

TreeConfig TreeConfig::expansion(std::vector<int> branching, bool target_init) {
  TreeConfig config;
  config.target_init_width = target_init && !branching.empty() ? branching.front() : 0;
  config.shape = ExpansionShape{std::move(branching)};
  config.validate();
  return config;
}

TreeConfig TreeConfig::fork(int width, int depth, bool target_init) {
  TreeConfig config;
  config.shape = ForkShape{width, depth};
  config.target_init_width = target_init ? width : 0;
  config.validate();
  return config;
}

void TreeConfig::validate() const {
  if (target_init_width < 0) throw ConfigError("target_init_width must be non-negative");
  if (const auto* e = std::get_if<ExpansionShape>(&shape)) {
    if (e->branching.empty()) throw ConfigError("expansion branching must be nonempty");
    for (int k : e->branching) {
      if (k < 1) throw ConfigError(fmt::format("branching entries must be positive, got {}", k));
    }
    if (target_init_width >= 1 && e->branching.front() != target_init_width) {
      throw ConfigError(fmt::format("first branching entry {} must equal target_init_width {}", e->branching.front(),
                                    target_init_width));
    }
    if (target_init_width >= 1 && e->branching.size() < 2) {
      throw ConfigError("a target-initialized tree needs at least one draft level");
    }
  } else {
    const auto& f = std::get<ForkShape>(shape);
    if (f.width < 1 || f.depth < 1) {
      throw ConfigError(fmt::format("fork needs W>=1 and D>=1, got W={} D={}", f.width, f.depth));
    }
    if (target_init_width >= 1 && target_init_width != f.width) {
      throw ConfigError("a target-initialized fork needs target_init_width == W");
    }
  }
}

std::vector<int> TreeConfig::level_branching() const {
  if (const auto* e = std::get_if<ExpansionShape>(&shape)) return e->branching;
  const auto& f = std::get<ForkShape>(shape);
  std::vector<int> levels(static_cast<std::size_t>(f.depth) + (target_initialized() ? 1 : 0), 1);
  levels.front() = f.width;
  return levels;
}

int TreeConfig::draft_levels() const {
  const int levels = static_cast<int>(level_branching().size());
  return target_initialized() ? levels - 1 : levels;
}

std::string TreeConfig::to_string() const {
  if (const auto* e = std::get_if<ExpansionShape>(&shape)) return fmt::format("{}", fmt::join(e->branching, ","));
  const auto& f = std::get<ForkShape>(shape);
  return fmt::format("fork:W={},D={}", f.width, f.depth);
}

bool operator==(const TreeConfig& a, const TreeConfig& b) {
  if (a.target_init_width != b.target_init_width || a.shape.index() != b.shape.index()) return false;
  if (const auto* e = std::get_if<ExpansionShape>(&a.shape)) {
    return e->branching == std::get<ExpansionShape>(b.shape).branching;
  }
  const auto& fa = std::get<ForkShape>(a.shape);
  const auto& fb = std::get<ForkShape>(b.shape);
  return fa.width == fb.width && fa.depth == fb.depth;
}

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(fmt::format("bad integer '{}' in tree config '{}'", text, whole));
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

TreeConfig parse_tree_config(std::string_view text, bool target_init) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.starts_with("fork:")) {
    text.remove_prefix(5);
    int width = -1;
    int depth = -1;
    while (!text.empty()) {
      const auto comma = text.find(',');
      const auto item = trim(text.substr(0, comma));
      text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ConfigError(fmt::format("expected KEY=VALUE in '{}'", whole));
      const auto key = trim(item.substr(0, eq));
      const int value = parse_int(trim(item.substr(eq + 1)), whole);
      if (key == "W" || key == "w") {
        width = value;
      } else if (key == "D" || key == "d") {
        depth = value;
      } else {
        throw ConfigError(fmt::format("unknown fork key '{}' in '{}'", key, whole));
      }
    }
    if (width < 0 || depth < 0) throw ConfigError(fmt::format("fork config '{}' needs W and D", whole));
    return TreeConfig::fork(width, depth, target_init);
  }
  std::vector<int> branching;
  while (!text.empty()) {
    const auto comma = text.find(',');
    branching.push_back(parse_int(trim(text.substr(0, comma)), whole));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
    if (text.empty()) throw ConfigError(fmt::format("trailing comma in '{}'", whole));
  }
  return TreeConfig::expansion(std::move(branching), target_init);
}

}  // namespace mcsd
