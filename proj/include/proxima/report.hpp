#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "proxima/coverage.hpp"

namespace proxima::report {

using Json = nlohmann::ordered_json;

enum class Format { csv, json };

/// Rounds half-to-even at `decimals` and returns the value the rendered text
/// denotes, so JSON numbers equal the CSV text.
double rounded(double v, int decimals);

/// Column label for a threshold: "lt_1", "lt_2.5".
std::string threshold_label(const Miles& m);

Json coverage_json(const CoverageTable& table, int decimals = 2);
Json decile_json(const DecileHistogram& h, int decimals = 2);
Json delta_json(const ScenarioDelta& delta, int decimals = 2);
Json distances_json(const DistanceTable& table);
Json per_capita_json(const std::vector<PerCapitaRow>& rows, int decimals = 2);
Json goal_json(const GoalCheck& goal, int decimals = 2);

/// Columns: group, scope, one per threshold, weighted_total.
std::string render_coverage(const CoverageTable& table, Format format, int decimals = 2);
/// Ten rows (bin 1..10) with count, share, matched base and unmatched count.
std::string render_decile(const DecileHistogram& h, Format format, int decimals = 2);
std::string render_delta(const ScenarioDelta& delta, Format format, int decimals = 2);
/// Per-tract distance deltas (CSV only; JSON is part of render_delta).
std::string render_tract_deltas(const ScenarioDelta& delta);
/// Distances use the shortest round-trip representation.
std::string render_distances(const DistanceTable& table, Format format);
std::string render_per_capita(const std::vector<PerCapitaRow>& rows, Format format,
                              int decimals = 2);
/// One human-readable line, e.g. "goal all_adults <5 mi: 86.30% vs target 90.00%: not met".
std::string render_goal_line(const GoalCheck& goal, int decimals = 2);

}  // namespace proxima::report
