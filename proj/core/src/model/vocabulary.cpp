#include "mcsd/model/vocabulary.hpp"

#include <fmt/format.h>

#include "mcsd/error.hpp"

namespace mcsd {

Vocabulary::Vocabulary(std::size_t size, std::vector<std::string> names) : size_(size), names_(std::move(names)) {
  if (size_ < 2) throw ConfigError(fmt::format("vocabulary needs at least 2 tokens, got {}", size_));
  if (!names_.empty() && names_.size() != size_) {
    throw ConfigError(fmt::format("{} display names for {} tokens", names_.size(), size_));
  }
}

std::string Vocabulary::display(TokenId t) const {
  if (!names_.empty() && contains(t)) return names_[static_cast<std::size_t>(t)];
  return std::to_string(t);
}

}  // namespace mcsd
