#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mcsd/engine/session.hpp"

namespace mcsd {

/// Line-delimited JSON trace, one object per step. `context` entries (prompt
/// index, seed, ...) are written first on every line.
void write_trace(std::ostream& out, const std::vector<StepRecord>& trace,
                 const std::map<std::string, std::string>& context = {});
std::string trace_line(const StepRecord& record, const std::map<std::string, std::string>& context = {});

/// Parses a trace written by write_trace. Throws ParseError naming the line.
std::vector<StepRecord> read_trace(std::istream& in);

/// Stats recomputed from raw trace records.
SessionStats stats_from_trace(const std::vector<StepRecord>& trace);

}  // namespace mcsd
