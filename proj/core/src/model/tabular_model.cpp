#include "mcsd/model/tabular_model.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mcsd/error.hpp"

namespace mcsd {

TabularModel::TabularModel(std::size_t vocab_size, int order)
    : vocab_(vocab_size), order_(order), uniform_(Distribution::uniform(vocab_size)) {
  if (order < 0) throw ConfigError("n-gram order must be non-negative");
}

void TabularModel::set_row(TokenSpan context, Distribution row) {
  if (context.size() > static_cast<std::size_t>(order_)) {
    throw ArgumentError(fmt::format("context of {} tokens exceeds order {}", context.size(), order_));
  }
  for (TokenId t : context) {
    if (!vocab_.contains(t)) throw ArgumentError(fmt::format("context token {} outside vocabulary", t));
  }
  if (row.size() != vocab_.size()) {
    throw ArgumentError(fmt::format("row has {} entries, vocabulary has {}", row.size(), vocab_.size()));
  }
  rows_.insert_or_assign(TokenSeq(context.begin(), context.end()), std::move(row));
}

const Distribution& TabularModel::row_for(TokenSpan context) const {
  const std::size_t longest = std::min(context.size(), static_cast<std::size_t>(order_));
  TokenSeq key;
  for (std::size_t len = longest + 1; len-- > 0;) {
    key.assign(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
    if (auto it = rows_.find(key); it != rows_.end()) return it->second;
  }
  return uniform_;
}

TokenOutput TabularModel::next(TokenSpan context) const {
  const Distribution& row = row_for(context);
  TokenOutput out;
  out.logits.resize(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double p = row.probs()[i];
    out.logits[i] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

void TabularModel::write(std::ostream& out) const {
  out << "vocab=" << vocab_.size() << " order=" << order_ << '\n';
  for (const auto& [context, row] : rows_) {
    for (TokenId t : context) out << t << ' ';
    out << '|';
    for (double p : row.probs()) out << ' ' << fmt::format("{:.17g}", p);
    out << '\n';
  }
}

TabularModel TabularModel::read(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t vocab = 0;
  int order = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (std::sscanf(line.c_str(), "vocab=%zu order=%d", &vocab, &order) != 2) {
      throw ParseError("expected header 'vocab=<n> order=<k>'", line_no);
    }
    break;
  }
  if (order < 0) throw ParseError("missing header", line_no);
  TabularModel model = [&] {
    try {
      return TabularModel(vocab, order);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto bar = line.find('|');
    if (bar == std::string::npos) throw ParseError("row is missing the '|' separator", line_no);
    TokenSeq context;
    {
      std::istringstream cs(line.substr(0, bar));
      TokenId t;
      while (cs >> t) context.push_back(t);
      if (!cs.eof()) throw ParseError("bad context id", line_no);
    }
    std::vector<double> probs;
    {
      std::istringstream ps(line.substr(bar + 1));
      double p;
      while (ps >> p) probs.push_back(p);
      if (!ps.eof()) throw ParseError("bad probability", line_no);
    }
    try {
      model.set_row(context, Distribution(std::move(probs)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return model;
}

void TabularModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out);
}

TabularModel TabularModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read(in);
}

}  // namespace mcsd
