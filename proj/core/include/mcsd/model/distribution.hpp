#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcsd/types.hpp"

namespace mcsd {

/// Probability vector over a vocabulary. Entries are non-negative and sum to
/// one within `kSumTolerance`; construction validates both.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  /// Scales non-negative `weights` to unit mass. Throws ArgumentError when the
  /// total mass is zero or an entry is negative/non-finite.
  static Distribution normalized(std::vector<double> weights);
  static Distribution one_hot(std::size_t size, TokenId token);
  static Distribution uniform(std::size_t size);

  std::size_t size() const noexcept { return probs_.size(); }
  bool empty() const noexcept { return probs_.empty(); }
  double operator[](TokenId token) const { return probs_[static_cast<std::size_t>(token)]; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// Number of tokens with strictly positive mass.
  std::size_t support_size() const noexcept;
  /// Argmax with ties broken by lowest token id.
  TokenId argmax() const noexcept;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Half the L1 distance. Sizes must match.
double total_variation(const Distribution& a, const Distribution& b);

}  // namespace mcsd
