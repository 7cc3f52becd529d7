#include "mcsd/model/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcsd/error.hpp"

namespace mcsd {

Distribution apply_temperature(std::span<const double> logits, double temperature) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ArgumentError(fmt::format("temperature must be non-negative, got {}", temperature));
  }
  if (logits.empty()) throw ArgumentError("empty logits");
  double max_logit = -std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double l = logits[i];
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
      throw ArgumentError(fmt::format("logit {} is not finite", i));
    }
    if (l > max_logit) {
      max_logit = l;
      best = i;
    }
  }
  if (!std::isfinite(max_logit)) throw ArgumentError("all logits are -inf");
  if (temperature == 0.0) return Distribution::one_hot(logits.size(), static_cast<TokenId>(best));

  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp((logits[i] - max_logit) / temperature);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return Distribution(std::move(probs));
}

TokenId sample(const Distribution& dist, Rng& rng) {
  const auto probs = dist.probs();
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (u < cumulative) return static_cast<TokenId>(i);
  }
  // Rounding left u above the accumulated mass.
  return static_cast<TokenId>(last_positive);
}

std::optional<Distribution> residual_distribution(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw ArgumentError(fmt::format("residual size mismatch {} vs {}", p.size(), q.size()));
  }
  std::vector<double> diff(p.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    diff[i] = std::max(0.0, p.probs()[i] - q.probs()[i]);
    mass += diff[i];
  }
  if (mass <= kResidualEpsilon) return std::nullopt;
  for (double& d : diff) d /= mass;
  return Distribution(std::move(diff));
}

Distribution residual_or_target(const Distribution& p, const Distribution& q) {
  auto residual = residual_distribution(p, q);
  return residual ? std::move(*residual) : p;
}

std::optional<Distribution> without_token(const Distribution& dist, TokenId token) {
  std::vector<double> rest(dist.probs().begin(), dist.probs().end());
  rest[static_cast<std::size_t>(token)] = 0.0;
  const double mass = std::accumulate(rest.begin(), rest.end(), 0.0);
  if (mass <= 0.0) return std::nullopt;
  for (double& r : rest) r /= mass;
  return Distribution(std::move(rest));
}

TokenSeq sample_without_replacement(const Distribution& dist, std::size_t count, Rng& rng) {
  TokenSeq out;
  std::optional<Distribution> current = dist;
  while (out.size() < count && current) {
    const TokenId t = sample(*current, rng);
    out.push_back(t);
    current = without_token(*current, t);
  }
  return out;
}

TokenSeq top_tokens(const Distribution& dist, std::size_t count) {
  TokenSeq ids;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probs()[i] > 0.0) ids.push_back(static_cast<TokenId>(i));
  }
  std::stable_sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) { return dist[a] > dist[b]; });
  if (ids.size() > count) ids.resize(count);
  return ids;
}

double entropy(const Distribution& dist) {
  double h = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace mcsd
