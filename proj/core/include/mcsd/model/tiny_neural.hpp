#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mcsd/model/language_model.hpp"
#include "mcsd/model/weight_file.hpp"

namespace mcsd {

/// Two-layer feed-forward next-token model over a fixed context window:
/// one-hot(last `window` tokens) -> tanh hidden layer -> vocabulary logits.
/// Positions before the start of the sequence contribute zero input.
class TinyNeuralModel final : public LanguageModel {
 public:
  TinyNeuralModel(std::size_t vocab_size, std::size_t window, std::size_t hidden_dim, std::uint64_t seed);

  const Vocabulary& vocabulary() const noexcept override { return vocab_; }
  std::size_t hidden_dim() const noexcept override { return static_cast<std::size_t>(b1_.size()); }
  std::string kind() const override { return "tiny_neural"; }
  TokenOutput next(TokenSpan context) const override;

  std::size_t window() const noexcept { return window_; }

  struct TrainOptions {
    int epochs = 5;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
  };
  /// Plain SGD on next-token cross-entropy over every position of every
  /// sequence. Returns the mean loss of each epoch.
  std::vector<double> train(const std::vector<TokenSeq>& corpus, const TrainOptions& options);

  WeightFile to_weights() const;
  static TinyNeuralModel from_weights(const WeightFile& weights);

 private:
  TinyNeuralModel(std::size_t vocab_size, std::size_t window, Eigen::MatrixXd w1, Eigen::VectorXd b1,
                  Eigen::MatrixXd w2, Eigen::VectorXd b2);
  Eigen::VectorXd hidden_pre(TokenSpan context) const;

  Vocabulary vocab_;
  std::size_t window_;
  Eigen::MatrixXd w1_;  // hidden x (window * vocab)
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;  // vocab x hidden
  Eigen::VectorXd b2_;
};

}  // namespace mcsd
