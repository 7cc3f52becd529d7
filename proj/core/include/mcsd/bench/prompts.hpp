#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mcsd/model/language_model.hpp"

namespace mcsd {

enum class PromptFormat {
  kAuto,     // records when the first non-blank line starts with '{'
  kPlain,    // one prompt per line: space-separated token ids
  kRecords,  // one JSON object per line with a "prompt" field (id array or id string)
};

/// Blank lines are skipped. Throws ParseError naming the line for malformed
/// records, non-integer ids, ids outside `vocab_size` (when given) or empty
/// prompts.
std::vector<TokenSeq> read_prompts(std::istream& in, PromptFormat format = PromptFormat::kAuto,
                                   std::optional<std::size_t> vocab_size = std::nullopt);
std::vector<TokenSeq> ingest_prompts(const std::filesystem::path& path, PromptFormat format = PromptFormat::kAuto,
                                     std::optional<std::size_t> vocab_size = std::nullopt);

/// Seeded subset of `n` prompts kept in corpus order. When n exceeds the
/// corpus the whole corpus is returned and a warning goes to `warn`.
std::vector<TokenSeq> subsample_prompts(const std::vector<TokenSeq>& prompts, std::size_t n, std::uint64_t seed,
                                        std::ostream* warn = nullptr);

/// `count` prompts of `length` tokens sampled from `model`.
std::vector<TokenSeq> synthetic_prompts(const LanguageModel& model, std::size_t count, std::size_t length,
                                        std::uint64_t seed);

}  // namespace mcsd
