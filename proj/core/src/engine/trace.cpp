#include "mcsd/engine/trace.hpp"

#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "mcsd/error.hpp"

namespace mcsd {

std::string trace_line(const StepRecord& r, const std::map<std::string, std::string>& context) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : context) j[k] = v;
  j["step"] = r.step;
  j["method"] = r.method;
  j["depth"] = r.depth_reached;
  j["longest_accepted"] = r.longest_accepted;
  j["max_draft_len"] = r.max_draft_len;
  j["emitted"] = r.emitted;
  j["target_calls"] = r.calls.target;
  j["draft_calls"] = r.calls.draft;
  j["draft_passes"] = r.calls.draft_passes;
  j["decision_calls"] = r.calls.decision;
  j["early_stop"] = r.early_stopped;
  j["draft_tokens"] = r.draft_tokens;
  return j.dump();
}

void write_trace(std::ostream& out, const std::vector<StepRecord>& trace,
                 const std::map<std::string, std::string>& context) {
  for (const auto& r : trace) out << trace_line(r, context) << '\n';
}

std::vector<StepRecord> read_trace(std::istream& in) {
  std::vector<StepRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      StepRecord r;
      r.step = j.at("step").get<std::size_t>();
      r.method = j.at("method").get<std::string>();
      r.depth_reached = j.at("depth").get<int>();
      r.longest_accepted = j.at("longest_accepted").get<int>();
      r.max_draft_len = j.at("max_draft_len").get<int>();
      r.emitted = j.at("emitted").get<std::size_t>();
      r.calls.target = j.at("target_calls").get<std::uint64_t>();
      r.calls.draft = j.at("draft_calls").get<std::uint64_t>();
      r.calls.draft_passes = j.at("draft_passes").get<std::uint64_t>();
      r.calls.decision = j.at("decision_calls").get<std::uint64_t>();
      r.early_stopped = j.at("early_stop").get<bool>();
      r.draft_tokens = j.at("draft_tokens").get<std::size_t>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

SessionStats stats_from_trace(const std::vector<StepRecord>& trace) {
  SessionStats s;
  for (const auto& r : trace) {
    s.total_emitted += r.emitted;
    ++s.total_steps;
    s.sum_longest_accepted += static_cast<std::uint64_t>(r.longest_accepted);
    s.sum_max_draft += static_cast<std::uint64_t>(r.max_draft_len);
    s.early_stops += r.early_stopped ? 1 : 0;
    s.draft_tokens += r.draft_tokens;
    s.calls += r.calls;
    if (r.max_draft_len > 0) ++s.depth_histogram[r.depth_reached];
  }
  return s;
}

}  // namespace mcsd
