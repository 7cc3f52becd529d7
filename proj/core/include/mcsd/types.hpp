#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mcsd {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;
using TokenSpan = std::span<const TokenId>;

inline constexpr TokenId kNoToken = -1;

}  // namespace mcsd
