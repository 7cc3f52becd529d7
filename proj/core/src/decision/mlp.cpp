#include "mcsd/decision/mlp.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "mcsd/error.hpp"
#include "mcsd/model/rng.hpp"

namespace mcsd {

double logistic(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2 || sizes_.back() != 1) throw ConfigError("MLP needs at least one layer ending in width 1");
  for (std::size_t s : sizes_) {
    if (s == 0) throw ConfigError("MLP layer widths must be positive");
  }
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

double Mlp::logit(std::span<const double> input) const {
  if (input.size() != input_dim()) {
    throw ArgumentError(fmt::format("MLP expects {} inputs, got {}", input_dim(), input.size()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    a = l + 1 < weights_.size() ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return a(0);
}

double Mlp::predict(std::span<const double> input) const { return logistic(logit(input)); }

double Mlp::sgd_step(std::span<const std::vector<double>* const> inputs, std::span<const double> labels, Loss loss,
                     double learning_rate) {
  if (inputs.size() != labels.size() || inputs.empty()) throw ArgumentError("sgd_step needs matching nonempty batch");
  const std::size_t layers = weights_.size();
  std::vector<Eigen::MatrixXd> grad_w;
  std::vector<Eigen::VectorXd> grad_b;
  for (std::size_t l = 0; l < layers; ++l) {
    grad_w.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    grad_b.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  double total_loss = 0.0;
  std::vector<Eigen::VectorXd> acts(layers + 1);
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const auto& x = *inputs[s];
    if (x.size() != input_dim()) throw ArgumentError("sgd_step input width mismatch");
    acts[0] = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    for (std::size_t l = 0; l < layers; ++l) {
      Eigen::VectorXd z = weights_[l] * acts[l] + biases_[l];
      acts[l + 1] = l + 1 < layers ? Eigen::VectorXd(z.array().tanh()) : z;
    }
    const double y = logistic(acts[layers](0));
    const double t = labels[s];
    double dz = 0.0;
    if (loss == Loss::kBinaryCrossEntropy) {
      const double yc = std::clamp(y, 1e-12, 1.0 - 1e-12);
      total_loss -= t * std::log(yc) + (1.0 - t) * std::log(1.0 - yc);
      dz = y - t;
    } else {
      total_loss += 0.5 * (y - t) * (y - t);
      dz = (y - t) * y * (1.0 - y);
    }
    Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, dz);
    for (std::size_t l = layers; l-- > 0;) {
      grad_w[l].noalias() += delta * acts[l].transpose();
      grad_b[l] += delta;
      if (l > 0) delta = (weights_[l].transpose() * delta).array() * (1.0 - acts[l].array().square());
    }
  }
  const double scale = learning_rate / static_cast<double>(inputs.size());
  for (std::size_t l = 0; l < layers; ++l) {
    weights_[l] -= scale * grad_w[l];
    biases_[l] -= scale * grad_b[l];
  }
  return total_loss / static_cast<double>(inputs.size());
}

void Mlp::write_to(WeightFile& weights, const std::string& prefix) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights.add(fmt::format("{}layer{}.weight", prefix, l), weights_[l]);
    weights.add(fmt::format("{}layer{}.bias", prefix, l), biases_[l]);
  }
}

Mlp Mlp::read_from(const WeightFile& weights, const std::string& prefix, std::size_t layers) {
  Mlp net;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd w = weights.matrix(fmt::format("{}layer{}.weight", prefix, l));
    Eigen::MatrixXd b = weights.matrix(fmt::format("{}layer{}.bias", prefix, l));
    if (b.cols() != 1 || b.rows() != w.rows()) throw ParseError(fmt::format("layer {} bias shape mismatch", l), 0);
    if (l == 0) {
      net.sizes_.push_back(static_cast<std::size_t>(w.cols()));
    } else if (static_cast<std::size_t>(w.cols()) != net.sizes_.back()) {
      throw ParseError(fmt::format("layer {} does not chain with the previous layer", l), 0);
    }
    net.sizes_.push_back(static_cast<std::size_t>(w.rows()));
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(b.col(0));
  }
  if (net.sizes_.empty() || net.sizes_.back() != 1) throw ParseError("MLP must end in a single output", 0);
  return net;
}

}  // namespace mcsd
