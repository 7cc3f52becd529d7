#pragma once

namespace mcsd {

/// Expected speedup of speculative decoding with acceptance rate alpha, draft
/// length gamma and draft/target cost ratio c:
/// (1 - alpha^(gamma+1)) / ((1 - alpha)(c*gamma + 1)).
/// Throws ArgumentError unless 0 <= alpha < 1, gamma >= 1 and c > 0.
double improvement_factor(double alpha, int gamma, double c);

}  // namespace mcsd
