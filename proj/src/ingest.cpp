#include "proxima/ingest.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "proxima/csv.hpp"

namespace proxima {

Count IngestReport::rejected_total() const {
  return std::accumulate(rejected.begin(), rejected.end(), Count{0},
                         [](Count acc, const auto& kv) { return acc + kv.second; });
}

bool IngestReport::balanced() const { return records_read == records_accepted + rejected_total(); }

namespace {

/// Column name -> field index for one parsed header.
class Header {
 public:
  Header(csv::Reader& reader, const std::vector<std::string>& required) {
    auto rec = reader.next();
    if (!rec) throw FormatError("missing header row");
    if (rec->unterminated_quote) throw FormatError("unterminated quote in header");
    width_ = rec->fields.size();
    for (std::size_t i = 0; i < rec->fields.size(); ++i) {
      const auto name = csv::lower(csv::trim(rec->fields[i]));
      if (!index_.emplace(name, i).second) {
        throw FormatError("duplicate header column '" + name + "'");
      }
    }
    for (const auto& col : required) {
      if (!index_.contains(col)) throw FormatError("header lacks required column '" + col + "'");
    }
  }

  std::size_t width() const { return width_; }
  bool has(const std::string& col) const { return index_.contains(col); }
  const std::string& get(const csv::Record& rec, const std::string& col) const {
    return rec.fields.at(index_.at(col));
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t width_ = 0;
};

/// A row-level rejection with its reason label.
struct Reject {
  std::string reason;
};

Count count_field(const Header& h, const csv::Record& rec, const std::string& col) {
  auto v = csv::parse_count(h.get(rec, col));
  if (!v) throw Reject{"parse-number"};
  return *v;
}

Coordinate coordinate_field(const Header& h, const csv::Record& rec) {
  auto lat = csv::parse_double(h.get(rec, "lat"));
  auto lon = csv::parse_double(h.get(rec, "lon"));
  if (!lat || !lon) throw Reject{"parse-number"};
  try {
    return Coordinate(*lat, *lon);
  } catch (const std::invalid_argument&) {
    throw Reject{"coordinate-range"};
  }
}

StateCode state_field(std::string_view raw, const StateUniverse& universe) {
  try {
    StateCode s(csv::trim(raw));
    if (!universe.contains(s)) throw Reject{"state-unknown"};
    return s;
  } catch (const InvariantError&) {
    throw Reject{"state-format"};
  }
}

void check_shape(const Header& h, const csv::Record& rec) {
  if (rec.unterminated_quote) throw Reject{"unterminated-quote"};
  if (rec.fields.size() != h.width()) throw Reject{"field-count"};
}

/// Shared row loop for facility-like files. `make` turns a record into a
/// facility or throws Reject.
template <class MakeFacility>
FacilityParseResult parse_facility_rows(csv::Reader& reader, const Header& header,
                                        const std::string& set_name,
                                        const FacilityFormat& format, MakeFacility make) {
  IngestReport report;
  std::vector<Facility> accepted;
  std::unordered_set<std::string> ids;

  std::vector<std::string> filter;
  for (const auto& label : format.chain_filter) filter.push_back(csv::lower(csv::trim(label)));
  std::vector<bool> filter_hit(filter.size(), false);

  while (auto rec = reader.next()) {
    ++report.records_read;
    try {
      check_shape(header, *rec);
      Facility f = make(*rec);
      if (f.id.empty()) throw Reject{"empty-id"};
      if (!filter.empty()) {
        const auto chain = csv::lower(csv::trim(f.chain));
        auto it = std::find(filter.begin(), filter.end(), chain);
        if (it == filter.end()) throw Reject{"chain-unmatched"};
        filter_hit[static_cast<std::size_t>(it - filter.begin())] = true;
      }
      if (f.role != FacilityRole::retail) throw Reject{"non-retail"};
      if (f.quality == GeocodeQuality::failed) throw Reject{"geocode-failed"};
      if (ids.contains(f.id)) throw Reject{"duplicate-id"};
      ids.insert(f.id);
      if (f.quality == GeocodeQuality::doubt) ++report.geocode_doubt;
      accepted.push_back(std::move(f));
      ++report.records_accepted;
    } catch (const Reject& r) {
      report.reject(r.reason);
    }
  }
  for (std::size_t i = 0; i < filter.size(); ++i) {
    if (!filter_hit[i]) {
      report.warnings.push_back("chain '" + format.chain_filter[i] + "' matched no rows");
    }
  }
  return {FacilitySet(set_name, std::move(accepted)), std::move(report)};
}

GeocodeQuality quality_field(std::string_view raw) {
  auto q = parse_quality(csv::lower(csv::trim(raw)));
  if (!q) throw Reject{"bad-quality"};
  return *q;
}

}  // namespace

TractParseResult parse_tracts(std::istream& source, const TractFormat& format) {
  csv::Reader reader(source, format.delimiter);
  const Header header(reader, kTractColumns);

  TractParseResult out;
  auto& report = out.report;
  std::unordered_set<std::string> ids;

  while (auto rec = reader.next()) {
    ++report.records_read;
    try {
      check_shape(header, *rec);
      std::string id(csv::trim(header.get(*rec, "tract_id")));
      if (id.empty()) throw Reject{"empty-id"};
      StateCode state = state_field(header.get(*rec, "state"), format.universe);
      Coordinate centroid = coordinate_field(header, *rec);

      CountFields f;
      f.adults_total = count_field(header, *rec, "adults_total");
      f.households_total = count_field(header, *rec, "households_total");
      f.households_low_income = count_field(header, *rec, "hh_lt_35k");
      f.households_high_income = count_field(header, *rec, "hh_gt_100k");
      f.pop_total = count_field(header, *rec, "pop_total");
      f.pop_white = count_field(header, *rec, "pop_white");
      f.pop_black = count_field(header, *rec, "pop_black");
      f.pop_aapi = count_field(header, *rec, "pop_aapi");
      f.pop_other = count_field(header, *rec, "pop_other");
      f.pop_hispanic = count_field(header, *rec, "pop_hispanic");
      f.pop_non_hispanic = count_field(header, *rec, "pop_non_hispanic");

      DemographicCounts counts = [&] {
        try {
          return DemographicCounts(f);
        } catch (const InvariantError& e) {
          throw Reject{e.reason()};
        }
      }();

      if (ids.contains(id)) throw Reject{"duplicate-id"};
      ids.insert(id);
      out.tracts.push_back(Tract{std::move(id), std::move(state), centroid, counts, std::nullopt});
      ++report.records_accepted;
    } catch (const Reject& r) {
      report.reject(r.reason);
    }
  }
  return out;
}

FacilityParseResult parse_facilities(std::istream& source, const std::string& set_name,
                                     const std::optional<StateCode>& state_override,
                                     const FacilityFormat& format) {
  csv::Reader reader(source, format.delimiter);
  const Header header(reader, kFacilityColumns);
  const bool has_tract = header.has("tract_id");

  return parse_facility_rows(reader, header, set_name, format, [&](const csv::Record& rec) {
    std::string id(csv::trim(header.get(rec, "facility_id")));
    std::string chain(csv::trim(header.get(rec, "chain")));
    if (chain.empty()) chain = set_name;
    StateCode state = state_override ? *state_override
                                     : state_field(header.get(rec, "state"), format.universe);
    Coordinate coord = coordinate_field(header, rec);
    auto role = parse_role(csv::lower(csv::trim(header.get(rec, "role"))));
    if (!role) throw Reject{"bad-role"};
    GeocodeQuality quality = quality_field(header.get(rec, "geocode_quality"));
    std::optional<std::string> tract;
    if (has_tract) {
      auto t = csv::trim(header.get(rec, "tract_id"));
      if (!t.empty()) tract = std::string(t);
    }
    return Facility{std::move(id), std::move(chain), std::move(state), coord, *role, quality,
                    std::move(tract)};
  });
}

FacilityParseResult parse_state_sites(std::istream& source, const StateCode& state,
                                      const FacilityFormat& format) {
  csv::Reader reader(source, format.delimiter);
  const Header header(reader, kStateSiteColumns);
  const std::string label = "state:" + state.str();

  FacilityFormat no_filter = format;
  no_filter.chain_filter.clear();
  return parse_facility_rows(reader, header, label, no_filter, [&](const csv::Record& rec) {
    std::string id(csv::trim(header.get(rec, "site_id")));
    const auto raw_state = csv::trim(header.get(rec, "state"));
    if (!raw_state.empty()) {
      StateCode row_state = state_field(raw_state, format.universe);
      if (row_state != state) throw Reject{"state-mismatch"};
    }
    Coordinate coord = coordinate_field(header, rec);
    GeocodeQuality quality = quality_field(header.get(rec, "geocode_quality"));
    return Facility{std::move(id), label, state, coord, FacilityRole::retail, quality, {}};
  });
}

FacilitySet dedupe_coordinates(const FacilitySet& set) {
  // +0.0 and -0.0 compare equal, so normalise them to one key
  auto key = [](const Coordinate& c) {
    return std::pair(c.lat() == 0.0 ? 0.0 : c.lat(), c.lon() == 0.0 ? 0.0 : c.lon());
  };
  std::map<std::pair<double, double>, const Facility*> best;
  for (const auto& f : set.facilities()) {
    auto [it, inserted] = best.emplace(key(f.coordinate), &f);
    if (!inserted && f.id < it->second->id) it->second = &f;
  }
  std::vector<Facility> out;
  out.reserve(best.size());
  for (const auto& [_, f] : best) out.push_back(*f);
  std::sort(out.begin(), out.end(), [](const Facility& a, const Facility& b) { return a.id < b.id; });
  return FacilitySet(set.name(), std::move(out));
}

SviJoinResult join_svi(std::vector<Tract> tracts, std::istream& svi_source, char delimiter) {
  csv::Reader reader(svi_source, delimiter);
  const Header header(reader, kSviColumns);

  SviJoinResult out;
  auto& report = out.report;
  std::unordered_map<std::string, std::optional<SviPercentile>> values;

  while (auto rec = reader.next()) {
    ++report.records_read;
    try {
      check_shape(header, *rec);
      std::string id(csv::trim(header.get(*rec, "tract_id")));
      if (id.empty()) throw Reject{"empty-id"};
      auto v = csv::parse_double(header.get(*rec, "rpl_themes"));
      if (!v) throw Reject{"parse-number"};
      std::optional<SviPercentile> pct;
      if (*v != kSviMissingSentinel) {
        try {
          pct = SviPercentile(*v);
        } catch (const InvariantError&) {
          throw Reject{"svi-range"};
        }
      }
      if (values.contains(id)) throw Reject{"duplicate-id"};
      values.emplace(std::move(id), pct);
      ++report.records_accepted;
    } catch (const Reject& r) {
      report.reject(r.reason);
    }
  }

  for (auto& t : tracts) {
    auto it = values.find(t.id);
    t.svi = it == values.end() ? std::nullopt : it->second;
    if (t.svi) ++report.svi_matched;
  }
  out.tracts = std::move(tracts);
  return out;
}

void write_tracts(std::ostream& out, const std::vector<Tract>& tracts) {
  csv::write_row(out, kTractColumns);
  for (const auto& t : tracts) {
    const auto& f = t.counts.fields();
    auto n = [](Count c) { return std::to_string(c); };
    csv::write_row(out, {t.id, t.state.str(), csv::format_roundtrip(t.centroid.lat()),
                         csv::format_roundtrip(t.centroid.lon()), n(f.adults_total),
                         n(f.households_total), n(f.households_low_income),
                         n(f.households_high_income), n(f.pop_total), n(f.pop_white),
                         n(f.pop_black), n(f.pop_aapi), n(f.pop_other), n(f.pop_hispanic),
                         n(f.pop_non_hispanic)});
  }
}

void write_svi(std::ostream& out, const std::vector<Tract>& tracts) {
  csv::write_row(out, kSviColumns);
  for (const auto& t : tracts) {
    if (t.svi) csv::write_row(out, {t.id, csv::format_roundtrip(t.svi->value())});
  }
}

void write_facilities(std::ostream& out, const FacilitySet& set) {
  const bool with_tract = std::any_of(set.facilities().begin(), set.facilities().end(),
                                      [](const Facility& f) { return f.tract_id.has_value(); });
  auto header = kFacilityColumns;
  if (with_tract) header.push_back("tract_id");
  csv::write_row(out, header);
  for (const auto& f : set.facilities()) {
    std::vector<std::string> row{f.id,
                                 f.chain,
                                 f.state.str(),
                                 csv::format_roundtrip(f.coordinate.lat()),
                                 csv::format_roundtrip(f.coordinate.lon()),
                                 std::string(to_string(f.role)),
                                 std::string(to_string(f.quality))};
    if (with_tract) row.push_back(f.tract_id.value_or(""));
    csv::write_row(out, row);
  }
}

}  // namespace proxima
