#include "mcsd/engine/engine_config.hpp"

#include <fmt/format.h>

#include "mcsd/error.hpp"

namespace mcsd {

std::string method_name(const Method& method) {
  struct Visitor {
    std::string operator()(const VanillaMethod&) const { return "vanilla"; }
    std::string operator()(const BaselineSdMethod&) const { return "sd"; }
    std::string operator()(const McsdMethod&) const { return "mcsd"; }
    std::string operator()(const TargetInitMethod&) const { return "tinit"; }
    std::string operator()(const DynamicMethod&) const { return "dynamic"; }
  };
  return std::visit(Visitor{}, method);
}

std::string method_config(const Method& method) {
  struct Visitor {
    std::string operator()(const VanillaMethod&) const { return "-"; }
    std::string operator()(const BaselineSdMethod& m) const { return fmt::format("gamma={}", m.gamma); }
    std::string operator()(const McsdMethod& m) const { return m.tree.to_string(); }
    std::string operator()(const TargetInitMethod& m) const { return m.tree.to_string(); }
    std::string operator()(const DynamicMethod& m) const { return m.tree.to_string(); }
  };
  return std::visit(Visitor{}, method);
}

void validate_method(const Method& method) {
  if (const auto* sd = std::get_if<BaselineSdMethod>(&method)) {
    if (sd->gamma < 1) throw ConfigError(fmt::format("gamma must be >= 1, got {}", sd->gamma));
  } else if (const auto* m = std::get_if<McsdMethod>(&method)) {
    m->tree.validate();
    if (m->tree.target_initialized()) throw ConfigError("mcsd is draft-initialized; use tinit for target-init trees");
  } else if (const auto* t = std::get_if<TargetInitMethod>(&method)) {
    t->tree.validate();
    if (!t->tree.target_initialized()) throw ConfigError("tinit requires target_init_width >= 1");
  } else if (const auto* d = std::get_if<DynamicMethod>(&method)) {
    d->tree.validate();
    if (!d->tree.is_fork()) throw ConfigError("dynamic decoding requires a fork-shaped tree");
    if (!d->decision) throw ConfigError("dynamic decoding requires a decision model");
    if (!(d->beta > 0.0 && d->beta < 1.0)) throw ConfigError(fmt::format("beta must lie in (0,1), got {}", d->beta));
  }
}

void EngineConfig::validate() const {
  validate_method(method);
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be positive");
}

}  // namespace mcsd
