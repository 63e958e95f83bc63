#include "proxima/report.hpp"

#include <sstream>

#include "proxima/csv.hpp"

namespace proxima::report {

namespace {

std::string fixed_or_blank(const std::optional<double>& v, int decimals) {
  return v ? csv::format_fixed(*v, decimals) : std::string();
}

Json number_or_null(const std::optional<double>& v, int decimals) {
  return v ? Json(rounded(*v, decimals)) : Json(nullptr);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

double rounded(double v, int decimals) {
  return *csv::parse_double(csv::format_fixed(v, decimals));
}

std::string threshold_label(const Miles& m) { return "lt_" + csv::format_roundtrip(m.value()); }

Json coverage_json(const CoverageTable& table, int decimals) {
  Json out;
  Json thresholds = Json::array();
  for (const auto& t : table.thresholds) thresholds.push_back(t.value());
  out["thresholds"] = thresholds;
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json row;
    row["group"] = std::string(to_string(r.group));
    row["scope"] = r.scope.label;
    Json shares = Json::array();
    for (const auto& s : r.shares) shares.push_back(number_or_null(s, decimals));
    row["shares"] = shares;
    row["covered"] = r.covered;
    row["weighted_total"] = r.total;
    rows.push_back(std::move(row));
  }
  out["rows"] = rows;
  return out;
}

std::string render_coverage(const CoverageTable& table, Format format, int decimals) {
  if (format == Format::json) return dump(coverage_json(table, decimals));
  std::ostringstream out;
  std::vector<std::string> header{"group", "scope"};
  for (const auto& t : table.thresholds) header.push_back(threshold_label(t));
  header.push_back("weighted_total");
  csv::write_row(out, header);
  for (const auto& r : table.rows) {
    std::vector<std::string> row{std::string(to_string(r.group)), r.scope.label};
    for (const auto& s : r.shares) row.push_back(fixed_or_blank(s, decimals));
    row.push_back(std::to_string(r.total));
    csv::write_row(out, row);
  }
  return out.str();
}

Json decile_json(const DecileHistogram& h, int decimals) {
  Json out;
  const auto shares = h.shares();
  Json bins = Json::array();
  for (std::size_t i = 0; i < 10; ++i) {
    Json b;
    b["bin"] = i + 1;
    b["count"] = h.counts[i];
    b["share"] = rounded(shares[i], decimals);
    bins.push_back(std::move(b));
  }
  out["bins"] = bins;
  out["matched_base"] = h.matched;
  out["unmatched"] = h.unmatched;
  return out;
}

std::string render_decile(const DecileHistogram& h, Format format, int decimals) {
  if (format == Format::json) return dump(decile_json(h, decimals));
  std::ostringstream out;
  csv::write_row(out, {"bin", "count", "share", "matched_base", "unmatched"});
  const auto shares = h.shares();
  for (std::size_t i = 0; i < 10; ++i) {
    csv::write_row(out, {std::to_string(i + 1), std::to_string(h.counts[i]),
                         csv::format_fixed(shares[i], decimals), std::to_string(h.matched),
                         std::to_string(h.unmatched)});
  }
  return out.str();
}

Json delta_json(const ScenarioDelta& delta, int decimals) {
  Json out;
  Json thresholds = Json::array();
  for (const auto& t : delta.thresholds) thresholds.push_back(t.value());
  out["thresholds"] = thresholds;
  Json rows = Json::array();
  for (const auto& r : delta.rows) {
    Json row;
    row["group"] = std::string(to_string(r.group));
    row["scope"] = r.scope.label;
    for (const auto* key : {"base", "augmented", "delta"}) {
      const auto& src = std::string_view(key) == "base"        ? r.base
                        : std::string_view(key) == "augmented" ? r.augmented
                                                               : r.delta;
      Json values = Json::array();
      for (const auto& v : src) values.push_back(number_or_null(v, decimals));
      row[key] = values;
    }
    rows.push_back(std::move(row));
  }
  out["rows"] = rows;
  Json tracts = Json::array();
  for (const auto& t : delta.tracts) {
    Json j;
    j["tract_id"] = t.tract_id;
    j["base_miles"] = t.base ? Json(t.base->value()) : Json(nullptr);
    j["augmented_miles"] = t.augmented ? Json(t.augmented->value()) : Json(nullptr);
    j["delta_miles"] = t.delta_miles ? Json(*t.delta_miles) : Json(nullptr);
    tracts.push_back(std::move(j));
  }
  out["tracts"] = tracts;
  return out;
}

std::string render_delta(const ScenarioDelta& delta, Format format, int decimals) {
  if (format == Format::json) return dump(delta_json(delta, decimals));
  std::ostringstream out;
  std::vector<std::string> header{"group", "scope"};
  for (const auto* prefix : {"base_", "augmented_", "delta_"}) {
    for (const auto& t : delta.thresholds) header.push_back(prefix + threshold_label(t));
  }
  csv::write_row(out, header);
  for (const auto& r : delta.rows) {
    std::vector<std::string> row{std::string(to_string(r.group)), r.scope.label};
    for (const auto* values : {&r.base, &r.augmented, &r.delta}) {
      for (const auto& v : *values) row.push_back(fixed_or_blank(v, decimals));
    }
    csv::write_row(out, row);
  }
  return out.str();
}

std::string render_tract_deltas(const ScenarioDelta& delta) {
  std::ostringstream out;
  csv::write_row(out, {"tract_id", "base_miles", "augmented_miles", "delta_miles"});
  auto miles = [](const std::optional<Miles>& m) {
    return m ? csv::format_roundtrip(m->value()) : std::string();
  };
  for (const auto& t : delta.tracts) {
    csv::write_row(out, {t.tract_id, miles(t.base), miles(t.augmented),
                         t.delta_miles ? csv::format_roundtrip(*t.delta_miles) : std::string()});
  }
  return out.str();
}

Json distances_json(const DistanceTable& table) {
  Json out;
  out["scenario"] = table.scenario;
  out["facility_count"] = table.facility_count;
  Json entries = Json::array();
  for (const auto& e : table.entries) {
    Json j;
    j["tract_id"] = e.tract_id;
    j["facility_id"] = e.nearest ? Json(e.nearest->id) : Json(nullptr);
    j["miles"] = e.nearest ? Json(e.nearest->distance.value()) : Json(nullptr);
    entries.push_back(std::move(j));
  }
  out["entries"] = entries;
  return out;
}

std::string render_distances(const DistanceTable& table, Format format) {
  if (format == Format::json) return dump(distances_json(table));
  std::ostringstream out;
  csv::write_row(out, {"tract_id", "facility_id", "miles"});
  for (const auto& e : table.entries) {
    if (e.nearest) {
      csv::write_row(out, {e.tract_id, e.nearest->id,
                           csv::format_roundtrip(e.nearest->distance.value())});
    } else {
      csv::write_row(out, {e.tract_id, "", ""});
    }
  }
  return out.str();
}

Json per_capita_json(const std::vector<PerCapitaRow>& rows, int decimals) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["state"] = r.state;
    j["facilities"] = r.facilities;
    j["population"] = r.population;
    j["per_100k"] = number_or_null(r.per_100k, decimals);
    out.push_back(std::move(j));
  }
  return out;
}

std::string render_per_capita(const std::vector<PerCapitaRow>& rows, Format format,
                              int decimals) {
  if (format == Format::json) return dump(per_capita_json(rows, decimals));
  std::ostringstream out;
  csv::write_row(out, {"state", "facilities", "population", "per_100k"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.state, std::to_string(r.facilities), std::to_string(r.population),
                         fixed_or_blank(r.per_100k, decimals)});
  }
  return out.str();
}

Json goal_json(const GoalCheck& goal, int decimals) {
  Json out;
  out["group"] = std::string(to_string(goal.group));
  out["threshold_miles"] = goal.threshold.value();
  out["target"] = goal.target;
  out["share"] = number_or_null(goal.share, decimals);
  out["met"] = goal.met;
  return out;
}

std::string render_goal_line(const GoalCheck& goal, int decimals) {
  std::ostringstream out;
  out << "goal " << to_string(goal.group) << " <" << csv::format_roundtrip(goal.threshold.value())
      << " mi: " << (goal.share ? csv::format_fixed(*goal.share, decimals) + "%" : "n/a")
      << " vs target " << csv::format_fixed(goal.target, decimals) << "%: "
      << (goal.met ? "met" : "not met") << "\n";
  return out.str();
}

}  // namespace proxima::report
