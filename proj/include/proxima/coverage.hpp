#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxima/index.hpp"
#include "proxima/model.hpp"

namespace proxima {

using SetCatalog = std::map<std::string, FacilitySet>;

class UnknownSetError : public std::runtime_error {
 public:
  explicit UnknownSetError(std::string name)
      : std::runtime_error("unknown facility set '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

struct DistanceEntry {
  std::string tract_id;
  std::optional<NearestHit> nearest;
};

/// Nearest eligible facility per in-region tract, in input tract order.
struct DistanceTable {
  std::string scenario;
  std::size_t facility_count = 0;
  std::vector<DistanceEntry> entries;
};

struct AnalysisOptions {
  /// Worker threads for the per-tract search; 0 picks the hardware count.
  unsigned threads = 0;
  std::set<std::string> non_continental = StateUniverse::default_non_continental();
};

/// Facilities of the scenario's sets as one set. Ids are qualified as
/// "<set>/<id>" so equal ids in different sets stay distinct.
FacilitySet scenario_union(const Scenario& scenario, const SetCatalog& catalog);

/// Sorted, de-duplicated set names; the cache key for a scenario's index.
std::vector<std::string> union_key(const Scenario& scenario);

FacilityIndex build_scenario_index(const Scenario& scenario, const SetCatalog& catalog);

DistanceTable min_distance_table(const std::vector<Tract>& tracts, const Scenario& scenario,
                                 const SetCatalog& catalog, const AnalysisOptions& options = {});

/// Same, against an index already built for the scenario's sets.
DistanceTable min_distance_table(const std::vector<Tract>& tracts, const Scenario& scenario,
                                 const FacilityIndex& index,
                                 const AnalysisOptions& options = {});

/// National scope (labelled e.g. "US" or "CONUS") or a single state.
struct Scope {
  std::string label;
  std::optional<std::string> state;

  static Scope national(std::string label = "US") { return {std::move(label), std::nullopt}; }
  static Scope of_state(const std::string& s) { return {s, s}; }
};

struct CoverageRow {
  DemographicGroup group = DemographicGroup::all_adults;
  Scope scope;
  std::vector<Count> covered;  // weight strictly inside each threshold
  Count total = 0;
  /// Percentages in [0, 100]; absent when total is zero.
  std::vector<std::optional<double>> shares;
};

struct CoverageTable {
  std::vector<Miles> thresholds;
  std::vector<CoverageRow> rows;  // national rows first, then states ascending
};

/// Population-weighted share of `group` whose nearest facility is strictly
/// closer than each threshold. Tracts without a facility count only in the
/// denominator. Throws std::invalid_argument unless thresholds increase.
CoverageRow threshold_share(const DistanceTable& table, const std::vector<Tract>& tracts,
                            DemographicGroup group, const std::vector<Miles>& thresholds,
                            const Scope& scope = Scope::national());

CoverageTable coverage_table(const DistanceTable& table, const std::vector<Tract>& tracts,
                             const std::vector<DemographicGroup>& groups,
                             const std::vector<Miles>& thresholds,
                             const std::string& national_label = "US", bool per_state = true);

/// Decile 1..10 for a percentile; bin k covers [(k-1)/10, k/10), bin 10 is closed.
int svi_decile(double percentile) noexcept;

struct DecileHistogram {
  std::array<Count, 10> counts{};
  Count matched = 0;    // facilities in tracts with an SVI value
  Count unmatched = 0;  // facilities whose tract has no SVI, or no tract
  /// Percent of `matched` per bin; all zero when nothing matched.
  std::array<double, 10> shares() const;
};

/// Assigns each facility to its explicit tract_id if given, otherwise to the
/// nearest same-state tract centroid, and bins the tract's SVI.
DecileHistogram svi_decile_distribution(const FacilitySet& facilities,
                                        const std::vector<Tract>& tracts);

struct PerCapitaRow {
  std::string state;
  Count facilities = 0;
  Count population = 0;
  std::optional<double> per_100k;  // absent when population is zero
};

std::vector<PerCapitaRow> stores_per_100k(const FacilitySet& facilities,
                                          const std::vector<Tract>& tracts);

class UniverseMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeltaRow {
  DemographicGroup group = DemographicGroup::all_adults;
  Scope scope;
  std::vector<std::optional<double>> base;
  std::vector<std::optional<double>> augmented;
  std::vector<std::optional<double>> delta;  // augmented - base, percentage points
};

struct TractDelta {
  std::string tract_id;
  std::optional<Miles> base;
  std::optional<Miles> augmented;
  /// augmented - base when both exist.
  std::optional<double> delta_miles;
};

struct ScenarioDelta {
  std::vector<Miles> thresholds;
  std::vector<DeltaRow> rows;
  std::vector<TractDelta> tracts;
};

/// Throws UniverseMismatchError when the tables cover different tracts.
ScenarioDelta compare_scenarios(const DistanceTable& base, const DistanceTable& augmented,
                                const std::vector<Tract>& tracts,
                                const std::vector<DemographicGroup>& groups,
                                const std::vector<Miles>& thresholds,
                                const std::string& national_label = "US",
                                bool per_state = false);

struct GoalCheck {
  DemographicGroup group = DemographicGroup::all_adults;
  Miles threshold{5.0};
  double target = 90.0;
  std::optional<double> share;
  bool met = false;
};

GoalCheck goal_check(const DistanceTable& table, const std::vector<Tract>& tracts,
                     Miles threshold = Miles(5.0), double target = 90.0,
                     DemographicGroup group = DemographicGroup::all_adults);

}  // namespace proxima
