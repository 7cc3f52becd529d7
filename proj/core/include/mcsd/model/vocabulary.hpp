#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcsd/types.hpp"

namespace mcsd {

/// Dense token ids 0..size-1 with optional display strings.
class Vocabulary {
 public:
  explicit Vocabulary(std::size_t size, std::vector<std::string> names = {});

  std::size_t size() const noexcept { return size_; }
  bool contains(TokenId t) const noexcept { return t >= 0 && static_cast<std::size_t>(t) < size_; }
  /// Display string, or the decimal id when no names were supplied.
  std::string display(TokenId t) const;

 private:
  std::size_t size_;
  std::vector<std::string> names_;
};

}  // namespace mcsd
