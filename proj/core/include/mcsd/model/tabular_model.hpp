#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>

#include "mcsd/model/distribution.hpp"
#include "mcsd/model/language_model.hpp"

namespace mcsd {

/// Exact n-gram table. Lookup uses the longest suffix of the context (at most
/// `order` tokens) that has a row; with no matching row the next token is
/// uniform.
///
/// Text format: a header `vocab=<n> order=<k>`, then one line per context:
/// context ids, `|`, then n probabilities. An empty context is a line that
/// starts with `|`.
class TabularModel final : public LanguageModel {
 public:
  TabularModel(std::size_t vocab_size, int order);

  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  std::size_t hidden_dim() const noexcept override { return 0; }
  std::string kind() const override { return "tabular"; }
  TokenOutput next(TokenSpan context) const override;

  int order() const noexcept { return order_; }
  /// Throws ArgumentError for an over-long context, unknown ids or a row of
  /// the wrong size.
  void set_row(TokenSpan context, Distribution row);
  const Distribution& row_for(TokenSpan context) const;
  const std::map<TokenSeq, Distribution>& rows() const noexcept { return rows_; }

  void write(std::ostream& out) const;
  static TabularModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static TabularModel load(const std::filesystem::path& path);

 private:
  Vocabulary vocab_;
  int order_;
  std::map<TokenSeq, Distribution> rows_;
  Distribution uniform_;
};

}  // namespace mcsd
