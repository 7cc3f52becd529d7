#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "mcsd/decision/decision_model.hpp"
#include "mcsd/tree/tree_config.hpp"
#include "mcsd/types.hpp"

namespace mcsd {

/// How sibling candidates are drawn from the draft and verified.
enum class SiblingSampling {
  /// Sample without replacement; after a rejection the residual is updated
  /// and the rejected token removed from the draft distribution.
  kWithoutReplacement,
  /// Sample i.i.d.; after a rejection only the target residual is updated.
  kWithReplacement,
};

/// How target-initialized roots are chosen.
enum class InitSampling {
  kWithoutReplacement,
  kGreedy,  // top-W0 by target probability
};

struct VanillaMethod {};

struct BaselineSdMethod {
  int gamma = 4;
};

/// Draft-initialized multi-candidate tree.
struct McsdMethod {
  TreeConfig tree;
};

/// Target-initialized multi-candidate tree; tree.target_init_width >= 1.
struct TargetInitMethod {
  TreeConfig tree;
};

/// Fork tree drafted turn by turn with a decision model that may stop early.
struct DynamicMethod {
  TreeConfig tree;
  std::shared_ptr<const DecisionModel> decision;
  double beta = kDefaultStopThreshold;
};

using Method = std::variant<VanillaMethod, BaselineSdMethod, McsdMethod, TargetInitMethod, DynamicMethod>;

/// "vanilla", "sd", "mcsd", "tinit" or "dynamic".
std::string method_name(const Method& method);
/// Human-readable configuration: "-", "gamma=4", "2,4,3,1,1", "fork:W=16,D=5".
std::string method_config(const Method& method);
/// Throws ConfigError for gamma < 1, beta outside (0,1), missing decision
/// models, or a tree whose init flag disagrees with the method.
void validate_method(const Method& method);

struct EngineConfig {
  Method method = VanillaMethod{};
  double temperature = 1.0;
  int max_new_tokens = 200;
  std::uint64_t seed = 0;
  SiblingSampling siblings = SiblingSampling::kWithoutReplacement;
  InitSampling init = InitSampling::kWithoutReplacement;
  std::optional<TokenId> eos;

  void validate() const;
};

}  // namespace mcsd
