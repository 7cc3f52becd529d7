#include "mcsd/model/synthetic.hpp"

#include <cmath>
#include <functional>

#include "mcsd/error.hpp"
#include "mcsd/model/sampling.hpp"

namespace mcsd {

namespace {

Distribution random_row(std::size_t vocab, double sharpness, Rng& rng) {
  std::vector<double> logits(vocab);
  for (double& l : logits) l = sharpness * rng.normal();
  return apply_temperature(logits, 1.0);
}

void for_each_context(std::size_t vocab, int order, const std::function<void(const TokenSeq&)>& fn) {
  for (int len = 0; len <= order; ++len) {
    TokenSeq ctx(static_cast<std::size_t>(len), 0);
    while (true) {
      fn(ctx);
      int i = len - 1;
      while (i >= 0 && ctx[static_cast<std::size_t>(i)] + 1 == static_cast<TokenId>(vocab)) {
        ctx[static_cast<std::size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
      ++ctx[static_cast<std::size_t>(i)];
    }
  }
}

}  // namespace

TabularModel make_synthetic_target(const SyntheticParams& params) {
  if (params.order > 4) throw ConfigError("synthetic tables are limited to order <= 4");
  TabularModel model(params.vocab, params.order);
  Rng rng(params.seed);
  for_each_context(params.vocab, params.order,
                   [&](const TokenSeq& ctx) { model.set_row(ctx, random_row(params.vocab, params.sharpness, rng)); });
  return model;
}

TabularModel smoothed_draft(const TabularModel& target, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("smoothing tau must be positive");
  TabularModel draft(target.vocab_size(), target.order());
  for (const auto& [ctx, row] : target.rows()) {
    std::vector<double> w(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::pow(row.probs()[i], 1.0 / tau);
    draft.set_row(ctx, Distribution::normalized(std::move(w)));
  }
  return draft;
}

TabularModel noisy_draft(const TabularModel& target, double eps, std::uint64_t seed, double sharpness) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ArgumentError("noise eps must lie in [0, 1]");
  TabularModel draft(target.vocab_size(), target.order());
  Rng rng(seed);
  for (const auto& [ctx, row] : target.rows()) {
    const Distribution noise = random_row(row.size(), sharpness, rng);
    std::vector<double> w(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = (1.0 - eps) * row.probs()[i] + eps * noise.probs()[i];
    draft.set_row(ctx, Distribution::normalized(std::move(w)));
  }
  return draft;
}

TokenSeq sample_continuation(const LanguageModel& model, TokenSpan prefix, std::size_t length, double temperature,
                             Rng& rng) {
  TokenSeq seq(prefix.begin(), prefix.end());
  TokenSeq out;
  for (std::size_t i = 0; i < length; ++i) {
    const TokenId t = sample(apply_temperature(model.next(seq).logits, temperature), rng);
    seq.push_back(t);
    out.push_back(t);
  }
  return out;
}

}  // namespace mcsd
