#include "mcsd/model/tiny_neural.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

#include "mcsd/error.hpp"
#include "mcsd/model/rng.hpp"

namespace mcsd {

namespace {

Eigen::MatrixXd xavier(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return m;
}

}  // namespace

TinyNeuralModel::TinyNeuralModel(std::size_t vocab_size, std::size_t window, std::size_t hidden_dim, std::uint64_t seed)
    : vocab_(vocab_size), window_(window) {
  if (window == 0 || hidden_dim == 0) throw ConfigError("tiny neural model needs window>=1 and hidden>=1");
  Rng rng(seed);
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  const auto v = static_cast<Eigen::Index>(vocab_size);
  w1_ = xavier(h, static_cast<Eigen::Index>(window) * v, rng);
  b1_ = Eigen::VectorXd::Zero(h);
  w2_ = xavier(v, h, rng);
  b2_ = Eigen::VectorXd::Zero(v);
}

TinyNeuralModel::TinyNeuralModel(std::size_t vocab_size, std::size_t window, Eigen::MatrixXd w1, Eigen::VectorXd b1,
                                 Eigen::MatrixXd w2, Eigen::VectorXd b2)
    : vocab_(vocab_size),
      window_(window),
      w1_(std::move(w1)),
      b1_(std::move(b1)),
      w2_(std::move(w2)),
      b2_(std::move(b2)) {
  const auto v = static_cast<Eigen::Index>(vocab_size);
  if (w1_.cols() != static_cast<Eigen::Index>(window) * v || w1_.rows() != b1_.size() || w2_.rows() != v ||
      w2_.cols() != b1_.size() || b2_.size() != v) {
    throw ConfigError("tiny neural weight shapes are inconsistent");
  }
}

// Slot k holds the token k positions before the end of the context.
Eigen::VectorXd TinyNeuralModel::hidden_pre(TokenSpan context) const {
  Eigen::VectorXd pre = b1_;
  const auto v = static_cast<Eigen::Index>(vocab_.size());
  for (std::size_t k = 0; k < window_ && k < context.size(); ++k) {
    const TokenId t = context[context.size() - 1 - k];
    if (!vocab_.contains(t)) throw ArgumentError(fmt::format("token {} outside vocabulary", t));
    pre += w1_.col(static_cast<Eigen::Index>(k) * v + t);
  }
  return pre;
}

TokenOutput TinyNeuralModel::next(TokenSpan context) const {
  const Eigen::VectorXd h = hidden_pre(context).array().tanh().matrix();
  const Eigen::VectorXd logits = w2_ * h + b2_;
  return {std::vector<double>(logits.data(), logits.data() + logits.size()),
          std::vector<double>(h.data(), h.data() + h.size())};
}

std::vector<double> TinyNeuralModel::train(const std::vector<TokenSeq>& corpus, const TrainOptions& options) {
  struct Example {
    std::size_t seq;
    std::size_t pos;  // predict corpus[seq][pos] from the tokens before it
  };
  std::vector<Example> examples;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (std::size_t p = 1; p < corpus[s].size(); ++p) examples.push_back({s, p});
  }
  std::vector<double> curve;
  if (examples.empty()) return curve;
  Rng rng(options.seed);
  const auto v = static_cast<Eigen::Index>(vocab_.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = examples.size(); i > 1; --i) std::swap(examples[i - 1], examples[rng.below(i)]);
    double loss = 0.0;
    for (const auto& ex : examples) {
      const TokenSeq& seq = corpus[ex.seq];
      const TokenSpan context(seq.data(), ex.pos);
      const TokenId target = seq[ex.pos];
      const Eigen::VectorXd h = hidden_pre(context).array().tanh().matrix();
      Eigen::VectorXd logits = w2_ * h + b2_;
      const double max_logit = logits.maxCoeff();
      Eigen::VectorXd probs = (logits.array() - max_logit).exp().matrix();
      probs /= probs.sum();
      loss -= std::log(std::max(probs(target), 1e-300));

      Eigen::VectorXd dlogits = probs;
      dlogits(target) -= 1.0;
      const Eigen::VectorXd dh = (w2_.transpose() * dlogits).array() * (1.0 - h.array().square());
      w2_.noalias() -= options.learning_rate * dlogits * h.transpose();
      b2_ -= options.learning_rate * dlogits;
      for (std::size_t k = 0; k < window_ && k < context.size(); ++k) {
        const TokenId t = context[context.size() - 1 - k];
        w1_.col(static_cast<Eigen::Index>(k) * v + t) -= options.learning_rate * dh;
      }
      b1_ -= options.learning_rate * dh;
    }
    curve.push_back(loss / static_cast<double>(examples.size()));
  }
  return curve;
}

WeightFile TinyNeuralModel::to_weights() const {
  WeightFile wf;
  wf.set_meta("kind", "tiny_neural");
  wf.set_meta("vocab", std::to_string(vocab_.size()));
  wf.set_meta("window", std::to_string(window_));
  wf.set_meta("hidden", std::to_string(b1_.size()));
  wf.add("w1", w1_);
  wf.add("b1", b1_);
  wf.add("w2", w2_);
  wf.add("b2", b2_);
  return wf;
}

TinyNeuralModel TinyNeuralModel::from_weights(const WeightFile& weights) {
  if (weights.require_meta("kind") != "tiny_neural") throw ParseError("weights are not a tiny_neural model", 0);
  const std::size_t vocab = std::stoul(weights.require_meta("vocab"));
  const std::size_t window = std::stoul(weights.require_meta("window"));
  const std::size_t hidden = std::stoul(weights.require_meta("hidden"));
  return TinyNeuralModel(vocab, window, weights.matrix("w1", hidden, window * vocab), weights.matrix("b1", hidden, 1),
                         weights.matrix("w2", vocab, hidden), weights.matrix("b2", vocab, 1));
}

}  // namespace mcsd
