#pragma once

#include <cstddef>
#include <cstdint>

#include "mcsd/model/language_model.hpp"
#include "mcsd/model/rng.hpp"
#include "mcsd/model/tabular_model.hpp"

namespace mcsd {

/// Random tabular target: every context row is softmax(sharpness * z) with z
/// standard normal, so larger sharpness gives peakier rows.
struct SyntheticParams {
  std::size_t vocab = 32;
  int order = 1;
  double sharpness = 2.5;
  std::uint64_t seed = 1;
};

TabularModel make_synthetic_target(const SyntheticParams& params);

/// Row-wise p^(1/tau), renormalized. tau > 1 flattens the target.
TabularModel smoothed_draft(const TabularModel& target, double tau);

/// Row-wise (1 - eps) p + eps r with r a fresh random row.
TabularModel noisy_draft(const TabularModel& target, double eps, std::uint64_t seed, double sharpness = 1.0);

/// Ancestral sample of `length` tokens continuing `prefix`.
TokenSeq sample_continuation(const LanguageModel& model, TokenSpan prefix, std::size_t length, double temperature,
                             Rng& rng);

}  // namespace mcsd
