#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "mcsd/model/language_model.hpp"

namespace mcsd {

/// Target descriptors:
///   synth:vocab=32,order=1,sharpness=2.5,seed=1   random tabular target
///   neural:<path>                                 TinyNeural weight file
///   <path>                                        tabular table file
/// Draft descriptors additionally accept, relative to a tabular target:
///   same                                          the target itself
///   smooth:tau=1.5                                row-wise p^(1/tau)
///   noise:eps=0.3,seed=7,sharpness=1              mixture with random rows
///   tiny:window=2,hidden=16,epochs=3,corpus=200,length=24,seed=0
///                                                 TinyNeural fit to target samples
struct ModelPair {
  std::shared_ptr<const LanguageModel> target;
  std::shared_ptr<const LanguageModel> draft;
};

std::shared_ptr<const LanguageModel> load_target_spec(std::string_view spec);
std::shared_ptr<const LanguageModel> load_draft_spec(std::string_view spec,
                                                     const std::shared_ptr<const LanguageModel>& target);
ModelPair load_model_pair(std::string_view target_spec, std::string_view draft_spec);

/// "k=v,k=v" parsing for descriptor parameters. Throws ConfigError on keys
/// outside `allowed` or malformed pairs.
std::map<std::string, std::string> parse_params(std::string_view text, std::initializer_list<std::string_view> allowed);

}  // namespace mcsd
