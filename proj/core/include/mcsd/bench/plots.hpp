#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcsd/bench/experiment.hpp"

namespace mcsd {

/// Tab-separated plot data. Every writer throws ArgumentError on an empty
/// table before touching the file system.
///
///   bars     label, speedup
///   heatmap  x, y, value          (every x/y pair present exactly once)
///   series   series, x, y
///   results  dataset, method, config, temperature, alpha, ideal_speedup,
///            speedup_vs_mcsd, tokens, steps, target_calls, draft_calls,
///            draft_passes, decision_calls, decision_fires, depth_hist[, wall_ms]
struct SeriesPoint {
  std::string series;
  double x = 0.0;
  double y = 0.0;
};

void write_bars(std::ostream& out, const std::vector<ResultRow>& rows);
void write_heatmap(std::ostream& out, const std::vector<GridCell>& cells);
void write_series(std::ostream& out, const std::vector<SeriesPoint>& points);
void write_results(std::ostream& out, const std::vector<ResultRow>& rows);

void emit_bars(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
void emit_heatmap(const std::filesystem::path& path, const std::vector<GridCell>& cells);
void emit_series(const std::filesystem::path& path, const std::vector<SeriesPoint>& points);
void emit_results(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

/// Shortest text that reads back to the same double; "-" when absent.
std::string format_real(double value);

}  // namespace mcsd
