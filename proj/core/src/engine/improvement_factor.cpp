#include "mcsd/engine/improvement_factor.hpp"

#include <fmt/format.h>

#include <cmath>

#include "mcsd/error.hpp"

namespace mcsd {

double improvement_factor(double alpha, int gamma, double c) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ArgumentError(fmt::format("alpha must lie in [0,1), got {}", alpha));
  if (gamma < 1) throw ArgumentError(fmt::format("gamma must be positive, got {}", gamma));
  if (!(c > 0.0)) throw ArgumentError(fmt::format("cost ratio c must be positive, got {}", c));
  return (1.0 - std::pow(alpha, gamma + 1)) / ((1.0 - alpha) * (c * gamma + 1.0));
}

}  // namespace mcsd
