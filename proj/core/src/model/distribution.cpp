#include "mcsd/model/distribution.hpp"

#include <fmt/format.h>

#include <cmath>

#include "mcsd/error.hpp"

namespace mcsd {

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  double total = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw ArgumentError(fmt::format("distribution entry {} is {}", i, p));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw ArgumentError(fmt::format("distribution sums to {:.17g}", total));
  }
}

Distribution Distribution::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ArgumentError("weights must be finite and non-negative");
    total += w;
  }
  if (total <= 0.0) throw ArgumentError("cannot normalize zero mass");
  for (double& w : weights) w /= total;
  return Distribution(std::move(weights));
}

Distribution Distribution::one_hot(std::size_t size, TokenId token) {
  if (token < 0 || static_cast<std::size_t>(token) >= size) {
    throw ArgumentError(fmt::format("token {} outside vocabulary of {}", token, size));
  }
  std::vector<double> probs(size, 0.0);
  probs[static_cast<std::size_t>(token)] = 1.0;
  return Distribution(std::move(probs));
}

Distribution Distribution::uniform(std::size_t size) {
  if (size == 0) throw ArgumentError("uniform distribution over empty vocabulary");
  return Distribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

std::size_t Distribution::support_size() const noexcept {
  std::size_t n = 0;
  for (double p : probs_) n += p > 0.0 ? 1 : 0;
  return n;
}

TokenId Distribution::argmax() const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i) {
    if (probs_[i] > probs_[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

double total_variation(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) {
    throw ArgumentError(fmt::format("total_variation size mismatch {} vs {}", a.size(), b.size()));
  }
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a.probs()[i] - b.probs()[i]);
  return 0.5 * l1;
}

}  // namespace mcsd
