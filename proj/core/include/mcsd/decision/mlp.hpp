#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcsd/model/weight_file.hpp"

namespace mcsd {

enum class Loss { kBinaryCrossEntropy, kSquaredError };

/// Fully connected scorer: tanh hidden layers and a logistic scalar output.
/// `layer_sizes` lists every width from input to the final 1.
class Mlp {
 public:
  Mlp(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

  std::size_t input_dim() const noexcept { return sizes_.front(); }
  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }

  /// Pre-squash output.
  double logit(std::span<const double> input) const;
  /// Output in [0, 1].
  double predict(std::span<const double> input) const;

  /// One SGD update on the mean loss of a mini-batch; returns that loss.
  double sgd_step(std::span<const std::vector<double>* const> inputs, std::span<const double> labels, Loss loss,
                  double learning_rate);

  void write_to(WeightFile& weights, const std::string& prefix) const;
  static Mlp read_from(const WeightFile& weights, const std::string& prefix, std::size_t layers);

 private:
  Mlp() = default;

  std::vector<std::size_t> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

double logistic(double z) noexcept;

}  // namespace mcsd
