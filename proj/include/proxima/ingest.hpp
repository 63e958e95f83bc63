#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxima/model.hpp"

namespace proxima {

/// Fatal input problem (bad header, unreadable source).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestReport {
  Count records_read = 0;
  Count records_accepted = 0;
  std::map<std::string, Count> rejected;  // reason label -> rows
  Count svi_matched = 0;
  Count geocode_doubt = 0;  // accepted rows whose geocode was only a "doubt" match
  std::vector<std::string> warnings;

  Count rejected_total() const;
  /// records_read == records_accepted + sum of rejections.
  bool balanced() const;
  void reject(const std::string& reason) { ++rejected[reason]; }
};

struct TractFormat {
  char delimiter = ',';
  StateUniverse universe = StateUniverse::united_states();
};

struct FacilityFormat {
  char delimiter = ',';
  StateUniverse universe = StateUniverse::united_states();
  /// When nonempty, only rows whose chain matches one of these labels
  /// (trimmed, case-insensitive) are kept; others are rejected as
  /// "chain-unmatched". Labels matching no row produce a warning.
  std::vector<std::string> chain_filter;
};

struct TractParseResult {
  std::vector<Tract> tracts;
  IngestReport report;
};

struct FacilityParseResult {
  FacilitySet set;
  IngestReport report;
};

inline const std::vector<std::string> kTractColumns{
    "tract_id", "state",      "lat",       "lon",       "adults_total",
    "households_total",       "hh_lt_35k", "hh_gt_100k", "pop_total", "pop_white",
    "pop_black", "pop_aapi",  "pop_other", "pop_hispanic", "pop_non_hispanic"};
inline const std::vector<std::string> kFacilityColumns{
    "facility_id", "chain", "state", "lat", "lon", "role", "geocode_quality"};
inline const std::vector<std::string> kStateSiteColumns{"site_id", "state", "lat", "lon",
                                                        "geocode_quality"};
inline const std::vector<std::string> kSviColumns{"tract_id", "rpl_themes"};

inline constexpr double kSviMissingSentinel = -999.0;

TractParseResult parse_tracts(std::istream& source, const TractFormat& format = {});

/// Parses a facility file into a set named `set_name`. Rows with a blank
/// chain take `set_name` as their chain. `state_override` replaces every
/// row's state. Non-retail roles and failed geocodes are rejected.
FacilityParseResult parse_facilities(std::istream& source, const std::string& set_name,
                                     const std::optional<StateCode>& state_override = {},
                                     const FacilityFormat& format = {});

/// Parses a state-published site list. The set and chain are both labelled
/// "state:<ST>"; every site is retail.
FacilityParseResult parse_state_sites(std::istream& source, const StateCode& state,
                                      const FacilityFormat& format = {});

/// One facility per exact coordinate pair, keeping the smallest id. Output
/// is ordered by id.
FacilitySet dedupe_coordinates(const FacilitySet& set);

struct SviJoinResult {
  std::vector<Tract> tracts;
  IngestReport report;
};

/// Attaches SVI percentiles to tracts by id. The report counts SVI rows;
/// `svi_matched` counts tracts that received a value.
SviJoinResult join_svi(std::vector<Tract> tracts, std::istream& svi_source,
                       char delimiter = ',');

void write_tracts(std::ostream& out, const std::vector<Tract>& tracts);
/// Matched SVI values only, in tract order.
void write_svi(std::ostream& out, const std::vector<Tract>& tracts);
/// Facility format, plus a trailing tract_id column when any facility has one.
void write_facilities(std::ostream& out, const FacilitySet& set);

}  // namespace proxima
