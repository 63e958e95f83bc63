#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "proxima/geo.hpp"

namespace proxima {

using Count = std::uint64_t;

/// Thrown when a record breaks one of its invariants. `reason()` is a short
/// stable label (e.g. "race-sum") used for ingest rejection bookkeeping.
class InvariantError : public std::invalid_argument {
 public:
  InvariantError(std::string reason, const std::string& message)
      : std::invalid_argument(message), reason_(std::move(reason)) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

/// Two-letter uppercase state or territory code.
class StateCode {
 public:
  explicit StateCode(std::string_view code);
  const std::string& str() const noexcept { return code_; }
  friend auto operator<=>(const StateCode&, const StateCode&) = default;

 private:
  std::string code_;
};

/// The set of admissible state codes plus the codes treated as outside the
/// continental US. An open universe admits any well-formed code.
class StateUniverse {
 public:
  static StateUniverse united_states();
  static StateUniverse open();
  StateUniverse(std::set<std::string> members, std::set<std::string> non_continental);

  bool contains(const StateCode& s) const;
  bool is_continental(const StateCode& s) const;
  const std::set<std::string>& members() const noexcept { return members_; }
  const std::set<std::string>& non_continental() const noexcept { return non_continental_; }
  bool is_open() const noexcept { return open_; }

  static const std::set<std::string>& default_non_continental();

 private:
  StateUniverse() = default;
  std::set<std::string> members_;
  std::set<std::string> non_continental_;
  bool open_ = false;
};

struct CountFields {
  Count adults_total = 0;
  Count households_total = 0;
  Count households_low_income = 0;   // annual income below $35K
  Count households_high_income = 0;  // annual income above $100K
  Count pop_total = 0;
  Count pop_white = 0;
  Count pop_black = 0;
  Count pop_aapi = 0;
  Count pop_other = 0;
  Count pop_hispanic = 0;
  Count pop_non_hispanic = 0;

  friend bool operator==(const CountFields&, const CountFields&) = default;
};

/// Validated demographic counts for one tract. Throws InvariantError with
/// reason "race-sum", "ethnicity-sum" or "household-sum".
class DemographicCounts {
 public:
  DemographicCounts() = default;
  explicit DemographicCounts(const CountFields& fields);
  const CountFields& fields() const noexcept { return fields_; }
  friend bool operator==(const DemographicCounts&, const DemographicCounts&) = default;

 private:
  CountFields fields_{};
};

/// Social vulnerability percentile rank in [0, 1].
class SviPercentile {
 public:
  explicit SviPercentile(double value);
  double value() const noexcept { return value_; }
  friend bool operator==(const SviPercentile&, const SviPercentile&) = default;

 private:
  double value_;
};

struct Tract {
  std::string id;
  StateCode state;
  Coordinate centroid;
  DemographicCounts counts;
  std::optional<SviPercentile> svi;

  friend bool operator==(const Tract&, const Tract&) = default;
};

enum class FacilityRole { retail, headquarters, distribution_center, other_non_retail };
enum class GeocodeQuality { success, doubt, failed, authoritative };

std::string_view to_string(FacilityRole r);
std::string_view to_string(GeocodeQuality q);
std::optional<FacilityRole> parse_role(std::string_view s);
std::optional<GeocodeQuality> parse_quality(std::string_view s);

struct Facility {
  std::string id;
  std::string chain;
  StateCode state;
  Coordinate coordinate;
  FacilityRole role = FacilityRole::retail;
  GeocodeQuality quality = GeocodeQuality::success;
  /// Explicit containing tract; overrides nearest-centroid assignment.
  std::optional<std::string> tract_id;

  friend bool operator==(const Facility&, const Facility&) = default;
};

/// Named collection of facilities with unique ids.
class FacilitySet {
 public:
  FacilitySet() = default;
  FacilitySet(std::string name, std::vector<Facility> facilities);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Facility>& facilities() const noexcept { return facilities_; }
  std::size_t size() const noexcept { return facilities_.size(); }
  bool empty() const noexcept { return facilities_.empty(); }

  friend bool operator==(const FacilitySet&, const FacilitySet&) = default;

 private:
  std::string name_;
  std::vector<Facility> facilities_;
};

enum class DemographicGroup {
  all_adults,
  households_low_income,
  households_high_income,
  pop_black,
  pop_white,
  pop_aapi,
  pop_other,
  pop_hispanic,
  pop_non_hispanic,
};

inline constexpr DemographicGroup kAllGroups[] = {
    DemographicGroup::all_adults,    DemographicGroup::households_low_income,
    DemographicGroup::households_high_income, DemographicGroup::pop_black,
    DemographicGroup::pop_white,     DemographicGroup::pop_aapi,
    DemographicGroup::pop_other,     DemographicGroup::pop_hispanic,
    DemographicGroup::pop_non_hispanic,
};

std::string_view to_string(DemographicGroup g);
std::optional<DemographicGroup> parse_group(std::string_view s);

Count group_weight(const Tract& tract, DemographicGroup group) noexcept;

struct RegionAll {
  friend bool operator==(const RegionAll&, const RegionAll&) = default;
};
struct RegionConus {
  friend bool operator==(const RegionConus&, const RegionConus&) = default;
};
struct RegionStates {
  std::set<std::string> states;
  friend bool operator==(const RegionStates&, const RegionStates&) = default;
};
using Region = std::variant<RegionAll, RegionConus, RegionStates>;

/// "all", "conus", or a comma-separated state list.
Region parse_region(std::string_view s);
/// Label used for the national-scope row: "US", "CONUS", or "AL+AR".
std::string region_label(const Region& region);

bool in_region(const Tract& tract, const Region& region,
               const std::set<std::string>& non_continental =
                   StateUniverse::default_non_continental());

std::vector<Miles> default_thresholds();

struct Scenario {
  std::string name;
  std::vector<std::string> sets;
  Region region = RegionAll{};
  /// State -> extra states whose facilities may serve its tracts.
  std::map<std::string, std::set<std::string>> cross_state;
  std::vector<Miles> thresholds = default_thresholds();

  /// Throws InvariantError("thresholds", ...) unless thresholds are
  /// positive and strictly increasing, or ("sets", ...) if no set is named.
  void validate() const;

  /// States whose facilities may serve a tract in `state`.
  std::set<std::string> eligible_states(const std::string& state) const;
};

}  // namespace proxima
