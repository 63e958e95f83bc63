#include "proxima/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

namespace proxima {

StateCode::StateCode(std::string_view code) {
  if (code.size() != 2 || !std::isupper(static_cast<unsigned char>(code[0])) ||
      !std::isupper(static_cast<unsigned char>(code[1]))) {
    throw InvariantError("state-format", "state code must be two uppercase letters: '" +
                                             std::string(code) + "'");
  }
  code_ = std::string(code);
}

const std::set<std::string>& StateUniverse::default_non_continental() {
  static const std::set<std::string> codes{"AK", "HI", "PR", "VI", "GU", "MP", "AS"};
  return codes;
}

StateUniverse StateUniverse::united_states() {
  std::set<std::string> members{
      "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "DC", "FL", "GA", "HI", "ID", "IL",
      "IN", "IA", "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE",
      "NV", "NH", "NJ", "NM", "NY", "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD",
      "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY", "PR", "VI", "GU", "MP", "AS"};
  return StateUniverse(std::move(members), default_non_continental());
}

StateUniverse StateUniverse::open() {
  StateUniverse u;
  u.non_continental_ = default_non_continental();
  u.open_ = true;
  return u;
}

StateUniverse::StateUniverse(std::set<std::string> members, std::set<std::string> non_continental)
    : members_(std::move(members)), non_continental_(std::move(non_continental)) {}

bool StateUniverse::contains(const StateCode& s) const {
  return open_ || members_.contains(s.str());
}

bool StateUniverse::is_continental(const StateCode& s) const {
  return !non_continental_.contains(s.str());
}

DemographicCounts::DemographicCounts(const CountFields& f) : fields_(f) {
  if (f.pop_white + f.pop_black + f.pop_aapi + f.pop_other != f.pop_total) {
    throw InvariantError("race-sum",
                         "pop_white + pop_black + pop_aapi + pop_other != pop_total");
  }
  if (f.pop_hispanic + f.pop_non_hispanic != f.pop_total) {
    throw InvariantError("ethnicity-sum", "pop_hispanic + pop_non_hispanic != pop_total");
  }
  if (f.households_low_income + f.households_high_income > f.households_total) {
    throw InvariantError("household-sum",
                         "households_low_income + households_high_income > households_total");
  }
}

SviPercentile::SviPercentile(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw InvariantError("svi-range", "SVI percentile outside [0, 1]");
  }
}

std::string_view to_string(FacilityRole r) {
  switch (r) {
    case FacilityRole::retail: return "retail";
    case FacilityRole::headquarters: return "headquarters";
    case FacilityRole::distribution_center: return "distribution_center";
    case FacilityRole::other_non_retail: return "other_non_retail";
  }
  return "retail";
}

std::string_view to_string(GeocodeQuality q) {
  switch (q) {
    case GeocodeQuality::success: return "success";
    case GeocodeQuality::doubt: return "doubt";
    case GeocodeQuality::failed: return "failed";
    case GeocodeQuality::authoritative: return "authoritative";
  }
  return "success";
}

std::optional<FacilityRole> parse_role(std::string_view s) {
  for (auto r : {FacilityRole::retail, FacilityRole::headquarters,
                 FacilityRole::distribution_center, FacilityRole::other_non_retail}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

std::optional<GeocodeQuality> parse_quality(std::string_view s) {
  for (auto q : {GeocodeQuality::success, GeocodeQuality::doubt, GeocodeQuality::failed,
                 GeocodeQuality::authoritative}) {
    if (s == to_string(q)) return q;
  }
  return std::nullopt;
}

FacilitySet::FacilitySet(std::string name, std::vector<Facility> facilities)
    : name_(std::move(name)), facilities_(std::move(facilities)) {
  std::unordered_set<std::string_view> seen;
  for (const auto& f : facilities_) {
    if (!seen.insert(f.id).second) {
      throw InvariantError("duplicate-id",
                           "facility id '" + f.id + "' repeated in set '" + name_ + "'");
    }
  }
}

std::string_view to_string(DemographicGroup g) {
  switch (g) {
    case DemographicGroup::all_adults: return "all_adults";
    case DemographicGroup::households_low_income: return "households_low_income";
    case DemographicGroup::households_high_income: return "households_high_income";
    case DemographicGroup::pop_black: return "pop_black";
    case DemographicGroup::pop_white: return "pop_white";
    case DemographicGroup::pop_aapi: return "pop_aapi";
    case DemographicGroup::pop_other: return "pop_other";
    case DemographicGroup::pop_hispanic: return "pop_hispanic";
    case DemographicGroup::pop_non_hispanic: return "pop_non_hispanic";
  }
  return "all_adults";
}

std::optional<DemographicGroup> parse_group(std::string_view s) {
  for (auto g : kAllGroups) {
    if (s == to_string(g)) return g;
  }
  return std::nullopt;
}

Count group_weight(const Tract& tract, DemographicGroup group) noexcept {
  const auto& f = tract.counts.fields();
  switch (group) {
    case DemographicGroup::all_adults: return f.adults_total;
    case DemographicGroup::households_low_income: return f.households_low_income;
    case DemographicGroup::households_high_income: return f.households_high_income;
    case DemographicGroup::pop_black: return f.pop_black;
    case DemographicGroup::pop_white: return f.pop_white;
    case DemographicGroup::pop_aapi: return f.pop_aapi;
    case DemographicGroup::pop_other: return f.pop_other;
    case DemographicGroup::pop_hispanic: return f.pop_hispanic;
    case DemographicGroup::pop_non_hispanic: return f.pop_non_hispanic;
  }
  return 0;
}

Region parse_region(std::string_view s) {
  if (s == "all") return RegionAll{};
  if (s == "conus") return RegionConus{};
  RegionStates out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
    out.states.insert(StateCode(piece).str());
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string region_label(const Region& region) {
  if (std::holds_alternative<RegionAll>(region)) return "US";
  if (std::holds_alternative<RegionConus>(region)) return "CONUS";
  std::string label;
  for (const auto& s : std::get<RegionStates>(region).states) {
    if (!label.empty()) label += '+';
    label += s;
  }
  return label;
}

bool in_region(const Tract& tract, const Region& region,
               const std::set<std::string>& non_continental) {
  if (std::holds_alternative<RegionAll>(region)) return true;
  if (std::holds_alternative<RegionConus>(region)) {
    return !non_continental.contains(tract.state.str());
  }
  return std::get<RegionStates>(region).states.contains(tract.state.str());
}

std::vector<Miles> default_thresholds() { return {Miles(1.0), Miles(2.0), Miles(5.0)}; }

void Scenario::validate() const {
  if (sets.empty()) throw InvariantError("sets", "scenario names no facility sets");
  if (thresholds.empty()) throw InvariantError("thresholds", "at least one threshold required");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i].value() <= 0.0) {
      throw InvariantError("thresholds", "thresholds must be positive");
    }
    if (i > 0 && !(thresholds[i - 1] < thresholds[i])) {
      throw InvariantError("thresholds", "thresholds must be strictly increasing");
    }
  }
}

std::set<std::string> Scenario::eligible_states(const std::string& state) const {
  std::set<std::string> out{state};
  if (auto it = cross_state.find(state); it != cross_state.end()) {
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

}  // namespace proxima
