#include "mcsd/bench/prompts.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "mcsd/error.hpp"
#include "mcsd/model/rng.hpp"
#include "mcsd/model/synthetic.hpp"

namespace mcsd {

namespace {

TokenSeq parse_ids(const std::string& text, std::size_t lineno) {
  TokenSeq out;
  std::istringstream in(text);
  std::string word;
  while (in >> word) {
    TokenId id = 0;
    const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), id);
    if (ec != std::errc() || ptr != word.data() + word.size()) {
      throw ParseError(fmt::format("'{}' is not a token id", word), lineno);
    }
    out.push_back(id);
  }
  return out;
}

TokenSeq parse_record(const std::string& line, std::size_t lineno) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("malformed record: {}", e.what()), lineno);
  }
  if (!j.is_object() || !j.contains("prompt")) throw ParseError("record has no \"prompt\" field", lineno);
  const auto& p = j["prompt"];
  if (p.is_string()) return parse_ids(p.get<std::string>(), lineno);
  if (!p.is_array()) throw ParseError("\"prompt\" must be an id array or an id string", lineno);
  TokenSeq out;
  for (const auto& v : p) {
    if (!v.is_number_integer()) throw ParseError("\"prompt\" array holds a non-integer", lineno);
    out.push_back(v.get<TokenId>());
  }
  return out;
}

}  // namespace

std::vector<TokenSeq> read_prompts(std::istream& in, PromptFormat format, std::optional<std::size_t> vocab_size) {
  std::vector<TokenSeq> prompts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (format == PromptFormat::kAuto) {
      format = line[line.find_first_not_of(" \t")] == '{' ? PromptFormat::kRecords : PromptFormat::kPlain;
    }
    TokenSeq prompt = format == PromptFormat::kRecords ? parse_record(line, lineno) : parse_ids(line, lineno);
    if (prompt.empty()) throw ParseError("empty prompt", lineno);
    for (TokenId t : prompt) {
      if (t < 0 || (vocab_size && static_cast<std::size_t>(t) >= *vocab_size)) {
        throw ParseError(fmt::format("token id {} outside the vocabulary", t), lineno);
      }
    }
    prompts.push_back(std::move(prompt));
  }
  return prompts;
}

std::vector<TokenSeq> ingest_prompts(const std::filesystem::path& path, PromptFormat format,
                                     std::optional<std::size_t> vocab_size) {
  std::ifstream in(path);
  if (!in) throw ArgumentError(fmt::format("cannot open prompt file {}", path.string()));
  return read_prompts(in, format, vocab_size);
}

std::vector<TokenSeq> subsample_prompts(const std::vector<TokenSeq>& prompts, std::size_t n, std::uint64_t seed,
                                        std::ostream* warn) {
  if (n >= prompts.size()) {
    if (n > prompts.size() && warn) {
      *warn << fmt::format("warning: requested {} prompts, corpus has {}; using all\n", n, prompts.size());
    }
    return prompts;
  }
  std::vector<std::size_t> idx(prompts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<TokenSeq> out;
  for (std::size_t i : idx) out.push_back(prompts[i]);
  return out;
}

std::vector<TokenSeq> synthetic_prompts(const LanguageModel& model, std::size_t count, std::size_t length,
                                        std::uint64_t seed) {
  if (length == 0) throw ArgumentError("prompt length must be positive");
  Rng rng(seed);
  std::vector<TokenSeq> out;
  for (std::size_t i = 0; i < count; ++i) {
    TokenSeq p{static_cast<TokenId>(rng.below(model.vocab_size()))};
    const TokenSeq rest = sample_continuation(model, p, length - 1, 1.0, rng);
    p.insert(p.end(), rest.begin(), rest.end());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mcsd
