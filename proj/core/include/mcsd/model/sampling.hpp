#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mcsd/model/distribution.hpp"
#include "mcsd/model/rng.hpp"
#include "mcsd/types.hpp"

namespace mcsd {

/// Temperature 0 gives the argmax one-hot (lowest id wins ties); otherwise
/// softmax(logits / temperature). A logit of -inf marks an impossible token.
Distribution apply_temperature(std::span<const double> logits, double temperature);

/// Draws a token with probability dist[token]. Never returns a zero-mass token.
TokenId sample(const Distribution& dist, Rng& rng);

/// Residual mass below which normalize(max(0, p - q)) is treated as empty.
inline constexpr double kResidualEpsilon = 1e-12;

/// normalize(max(0, p - q)); std::nullopt when the residual has no mass, in
/// which case the caller samples from p itself.
std::optional<Distribution> residual_distribution(const Distribution& p, const Distribution& q);

/// residual_distribution with the documented fallback applied.
Distribution residual_or_target(const Distribution& p, const Distribution& q);

/// `dist` with `token` zeroed and the rest renormalized; std::nullopt when
/// nothing remains.
std::optional<Distribution> without_token(const Distribution& dist, TokenId token);

/// Sequential sampling without replacement: sample, zero out, renormalize,
/// repeat. Stops early when the support is exhausted.
TokenSeq sample_without_replacement(const Distribution& dist, std::size_t count, Rng& rng);

/// The `count` most probable tokens with positive mass, ties by lowest id.
TokenSeq top_tokens(const Distribution& dist, std::size_t count);

/// Shannon entropy in nats.
double entropy(const Distribution& dist);

}  // namespace mcsd
