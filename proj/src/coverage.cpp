#include "proxima/coverage.hpp"

#include <algorithm>
#include <thread>
#include <unordered_map>

namespace proxima {

FacilitySet scenario_union(const Scenario& scenario, const SetCatalog& catalog) {
  std::vector<Facility> all;
  std::set<std::string> seen;
  for (const auto& name : scenario.sets) {
    auto it = catalog.find(name);
    if (it == catalog.end()) throw UnknownSetError(name);
    if (!seen.insert(name).second) continue;
    for (const auto& f : it->second.facilities()) {
      Facility q = f;
      q.id = name + "/" + f.id;
      all.push_back(std::move(q));
    }
  }
  std::string label;
  for (const auto& name : scenario.sets) label += (label.empty() ? "" : "+") + name;
  return FacilitySet(label, std::move(all));
}

std::vector<std::string> union_key(const Scenario& scenario) {
  std::set<std::string> names(scenario.sets.begin(), scenario.sets.end());
  return {names.begin(), names.end()};
}

FacilityIndex build_scenario_index(const Scenario& scenario, const SetCatalog& catalog) {
  return build_index(scenario_union(scenario, catalog));
}

DistanceTable min_distance_table(const std::vector<Tract>& tracts, const Scenario& scenario,
                                 const SetCatalog& catalog, const AnalysisOptions& options) {
  return min_distance_table(tracts, scenario, build_scenario_index(scenario, catalog), options);
}

DistanceTable min_distance_table(const std::vector<Tract>& tracts, const Scenario& scenario,
                                 const FacilityIndex& index, const AnalysisOptions& options) {
  DistanceTable out;
  out.scenario = scenario.name;
  out.facility_count = index.size();

  std::vector<const Tract*> selected;
  for (const auto& t : tracts) {
    if (in_region(t, scenario.region, options.non_continental)) selected.push_back(&t);
  }
  out.entries.resize(selected.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (auto i = begin; i < end; ++i) {
      const Tract& t = *selected[i];
      out.entries[i].tract_id = t.id;
      out.entries[i].nearest =
          index.nearest(t.centroid, scenario.eligible_states(t.state.str()));
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, threads);
  const std::size_t n = selected.size();
  if (threads == 1 || n < 2048) {
    work(0, n);
    return out;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  {
    std::vector<std::jthread> pool;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      pool.emplace_back(work, begin, std::min(n, begin + chunk));
    }
  }
  return out;
}

namespace {

void check_thresholds(const std::vector<Miles>& thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i].value() <= 0.0 || (i > 0 && !(thresholds[i - 1] < thresholds[i]))) {
      throw std::invalid_argument("thresholds must be positive and strictly increasing");
    }
  }
}

/// Index of the first threshold the distance is strictly below; size() when
/// none (or no facility).
std::size_t band_of(const std::optional<NearestHit>& hit, const std::vector<Miles>& thresholds) {
  if (!hit) return thresholds.size();
  const double d = hit->distance.value();
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (d < thresholds[k].value()) return k;
  }
  return thresholds.size();
}

/// Integer weight per (group, band) for one scope.
struct BandWeights {
  std::vector<std::vector<Count>> by_group;

  BandWeights(std::size_t groups, std::size_t bands)
      : by_group(groups, std::vector<Count>(bands, 0)) {}

  CoverageRow row(DemographicGroup group, std::size_t gi, Scope scope) const {
    CoverageRow r;
    r.group = group;
    r.scope = std::move(scope);
    const auto& bands = by_group[gi];
    Count running = 0;
    for (std::size_t k = 0; k + 1 < bands.size(); ++k) {
      running += bands[k];
      r.covered.push_back(running);
    }
    for (auto b : bands) r.total += b;
    for (auto c : r.covered) {
      if (r.total == 0) {
        r.shares.emplace_back(std::nullopt);
      } else {
        r.shares.emplace_back(100.0 * static_cast<double>(c) / static_cast<double>(r.total));
      }
    }
    return r;
  }
};

using TractLookup = std::unordered_map<std::string_view, const Tract*>;

TractLookup lookup_of(const std::vector<Tract>& tracts) {
  TractLookup out;
  out.reserve(tracts.size());
  for (const auto& t : tracts) out.emplace(t.id, &t);
  return out;
}

const Tract& find_tract(const TractLookup& lookup, const std::string& id) {
  auto it = lookup.find(id);
  if (it == lookup.end()) {
    throw std::invalid_argument("distance table names unknown tract '" + id + "'");
  }
  return *it->second;
}

}  // namespace

CoverageRow threshold_share(const DistanceTable& table, const std::vector<Tract>& tracts,
                            DemographicGroup group, const std::vector<Miles>& thresholds,
                            const Scope& scope) {
  check_thresholds(thresholds);
  const auto lookup = lookup_of(tracts);
  BandWeights acc(1, thresholds.size() + 1);
  for (const auto& e : table.entries) {
    const Tract& t = find_tract(lookup, e.tract_id);
    if (scope.state && t.state.str() != *scope.state) continue;
    acc.by_group[0][band_of(e.nearest, thresholds)] += group_weight(t, group);
  }
  return acc.row(group, 0, scope);
}

CoverageTable coverage_table(const DistanceTable& table, const std::vector<Tract>& tracts,
                             const std::vector<DemographicGroup>& groups,
                             const std::vector<Miles>& thresholds,
                             const std::string& national_label, bool per_state) {
  check_thresholds(thresholds);
  const auto lookup = lookup_of(tracts);
  const std::size_t bands = thresholds.size() + 1;

  BandWeights national(groups.size(), bands);
  std::map<std::string, BandWeights> states;
  for (const auto& e : table.entries) {
    const Tract& t = find_tract(lookup, e.tract_id);
    const auto band = band_of(e.nearest, thresholds);
    BandWeights* st = nullptr;
    if (per_state) {
      st = &states.try_emplace(t.state.str(), groups.size(), bands).first->second;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const Count w = group_weight(t, groups[g]);
      national.by_group[g][band] += w;
      if (st) st->by_group[g][band] += w;
    }
  }

  CoverageTable out;
  out.thresholds = thresholds;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out.rows.push_back(national.row(groups[g], g, Scope::national(national_label)));
  }
  for (const auto& [state, acc] : states) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      out.rows.push_back(acc.row(groups[g], g, Scope::of_state(state)));
    }
  }
  return out;
}

int svi_decile(double percentile) noexcept {
  int bin = 1;
  for (int k = 1; k <= 9; ++k) {
    if (percentile >= static_cast<double>(k) / 10.0) bin = k + 1;
  }
  return bin;
}

std::array<double, 10> DecileHistogram::shares() const {
  std::array<double, 10> out{};
  if (matched == 0) return out;
  for (std::size_t i = 0; i < 10; ++i) {
    out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(matched);
  }
  return out;
}

DecileHistogram svi_decile_distribution(const FacilitySet& facilities,
                                        const std::vector<Tract>& tracts) {
  DecileHistogram h;
  if (facilities.empty()) return h;

  std::vector<IndexedPoint> centroids;
  centroids.reserve(tracts.size());
  for (const auto& t : tracts) centroids.push_back({t.id, t.state.str(), t.centroid});
  const SpatialIndex tract_index(std::move(centroids));
  const auto lookup = lookup_of(tracts);

  for (const auto& f : facilities.facilities()) {
    const Tract* home = nullptr;
    if (f.tract_id) {
      if (auto it = lookup.find(*f.tract_id); it != lookup.end()) home = it->second;
    } else if (auto hit = tract_index.nearest(f.coordinate, {f.state.str()})) {
      home = lookup.at(hit->id);
    }
    if (home == nullptr || !home->svi) {
      ++h.unmatched;
      continue;
    }
    ++h.counts[static_cast<std::size_t>(svi_decile(home->svi->value()) - 1)];
    ++h.matched;
  }
  return h;
}

std::vector<PerCapitaRow> stores_per_100k(const FacilitySet& facilities,
                                          const std::vector<Tract>& tracts) {
  std::map<std::string, PerCapitaRow> by_state;
  for (const auto& t : tracts) {
    auto& row = by_state[t.state.str()];
    row.population += t.counts.fields().pop_total;
  }
  for (const auto& f : facilities.facilities()) ++by_state[f.state.str()].facilities;

  std::vector<PerCapitaRow> out;
  for (auto& [state, row] : by_state) {
    row.state = state;
    if (row.population > 0) {
      row.per_100k = static_cast<double>(row.facilities) / static_cast<double>(row.population) *
                     100000.0;
    }
    out.push_back(row);
  }
  return out;
}

ScenarioDelta compare_scenarios(const DistanceTable& base, const DistanceTable& augmented,
                                const std::vector<Tract>& tracts,
                                const std::vector<DemographicGroup>& groups,
                                const std::vector<Miles>& thresholds,
                                const std::string& national_label, bool per_state) {
  std::unordered_map<std::string_view, const DistanceEntry*> aug_by_id;
  for (const auto& e : augmented.entries) aug_by_id.emplace(e.tract_id, &e);
  if (aug_by_id.size() != base.entries.size()) {
    throw UniverseMismatchError("scenario tables cover different tract universes");
  }
  for (const auto& e : base.entries) {
    if (!aug_by_id.contains(e.tract_id)) {
      throw UniverseMismatchError("tract '" + e.tract_id + "' missing from augmented table");
    }
  }

  const auto b = coverage_table(base, tracts, groups, thresholds, national_label, per_state);
  const auto a = coverage_table(augmented, tracts, groups, thresholds, national_label, per_state);

  ScenarioDelta out;
  out.thresholds = thresholds;
  for (std::size_t r = 0; r < b.rows.size(); ++r) {
    DeltaRow row;
    row.group = b.rows[r].group;
    row.scope = b.rows[r].scope;
    row.base = b.rows[r].shares;
    row.augmented = a.rows[r].shares;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (row.base[k] && row.augmented[k]) {
        row.delta.emplace_back(*row.augmented[k] - *row.base[k]);
      } else {
        row.delta.emplace_back(std::nullopt);
      }
    }
    out.rows.push_back(std::move(row));
  }

  for (const auto& e : base.entries) {
    const auto& other = *aug_by_id.at(e.tract_id);
    TractDelta d;
    d.tract_id = e.tract_id;
    if (e.nearest) d.base = e.nearest->distance;
    if (other.nearest) d.augmented = other.nearest->distance;
    if (d.base && d.augmented) d.delta_miles = d.augmented->value() - d.base->value();
    out.tracts.push_back(std::move(d));
  }
  return out;
}

GoalCheck goal_check(const DistanceTable& table, const std::vector<Tract>& tracts,
                     Miles threshold, double target, DemographicGroup group) {
  GoalCheck g;
  g.group = group;
  g.threshold = threshold;
  g.target = target;
  g.share = threshold_share(table, tracts, group, {threshold}).shares.front();
  g.met = g.share && *g.share >= target;
  return g;
}

}  // namespace proxima
