#include "mcsd/bench/plots.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "mcsd/error.hpp"

namespace mcsd {

std::string format_real(double value) { return fmt::format("{}", value); }

namespace {

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : "-"; }

std::string label_of(const ResultRow& r) {
  return fmt::format("{}:{}@T={}", r.method, r.config, format_real(r.temperature));
}

std::string depth_hist(const SessionStats& s) {
  if (s.depth_histogram.empty()) return "-";
  std::string out;
  for (const auto& [depth, count] : s.depth_histogram)
    out += fmt::format("{}{}:{}", out.empty() ? "" : ";", depth, count);
  return out;
}

template <typename Writer>
void emit(const std::filesystem::path& path, Writer&& write) {
  // Render first so a failing check leaves no partial file behind.
  std::ostringstream buffer;
  write(buffer);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError(fmt::format("cannot write {}", path.string()));
  out << buffer.str();
}

}  // namespace

void write_bars(std::ostream& out, const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw ArgumentError("bars: empty result table");
  out << "label\tspeedup\n";
  for (const auto& r : rows) out << label_of(r) << '\t' << format_real(r.ideal_speedup) << '\n';
}

void write_heatmap(std::ostream& out, const std::vector<GridCell>& cells) {
  if (cells.empty()) throw ArgumentError("heatmap: empty grid");
  std::set<std::string> xs;
  std::set<std::string> ys;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& c : cells) {
    xs.insert(c.x);
    ys.insert(c.y);
    if (!seen.emplace(c.x, c.y).second) throw ArgumentError(fmt::format("heatmap: duplicate cell ({}, {})", c.x, c.y));
  }
  if (seen.size() != xs.size() * ys.size()) {
    throw ArgumentError(fmt::format("heatmap: {} cells do not fill a {}x{} grid", seen.size(), xs.size(), ys.size()));
  }
  out << "x\ty\tvalue\n";
  for (const auto& c : cells) out << c.x << '\t' << c.y << '\t' << format_real(c.value) << '\n';
}

void write_series(std::ostream& out, const std::vector<SeriesPoint>& points) {
  if (points.empty()) throw ArgumentError("series: no points");
  out << "series\tx\ty\n";
  for (const auto& p : points) out << p.series << '\t' << format_real(p.x) << '\t' << format_real(p.y) << '\n';
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw ArgumentError("results: empty result table");
  const bool wall = rows.front().wall_ms.has_value();
  out << "dataset\tmethod\tconfig\ttemperature\talpha\tideal_speedup\tspeedup_vs_mcsd\ttokens\tsteps\t"
         "target_calls\tdraft_calls\tdraft_passes\tdecision_calls\tdecision_fires\tdepth_hist";
  out << (wall ? "\twall_ms\n" : "\n");
  for (const auto& r : rows) {
    const auto& s = r.stats;
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", r.dataset, r.method, r.config,
                       format_real(r.temperature), optional_real(r.alpha), format_real(r.ideal_speedup),
                       optional_real(r.speedup_vs_mcsd), s.total_emitted, s.total_steps, s.calls.target, s.calls.draft,
                       s.calls.draft_passes, s.calls.decision, s.early_stops, depth_hist(s));
    if (wall) out << '\t' << optional_real(r.wall_ms);
    out << '\n';
  }
}

void emit_bars(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  emit(path, [&](std::ostream& o) { write_bars(o, rows); });
}
void emit_heatmap(const std::filesystem::path& path, const std::vector<GridCell>& cells) {
  emit(path, [&](std::ostream& o) { write_heatmap(o, cells); });
}
void emit_series(const std::filesystem::path& path, const std::vector<SeriesPoint>& points) {
  emit(path, [&](std::ostream& o) { write_series(o, points); });
}
void emit_results(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  emit(path, [&](std::ostream& o) { write_results(o, rows); });
}

}  // namespace mcsd
