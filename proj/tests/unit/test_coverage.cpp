#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "../support.hpp"
#include "proxima/coverage.hpp"

using namespace proxima;
using testing::make_facility;
using testing::make_tract;

namespace {

DistanceTable table_of(const std::vector<std::pair<std::string, std::optional<double>>>& rows) {
  DistanceTable t;
  for (const auto& [id, miles] : rows) {
    DistanceEntry e{id, std::nullopt};
    if (miles) e.nearest = NearestHit{"F", Miles(*miles)};
    t.entries.push_back(e);
  }
  return t;
}

Scenario scenario_of(std::vector<std::string> sets) {
  Scenario s;
  s.name = "s";
  s.sets = std::move(sets);
  return s;
}

std::vector<double> shares(const CoverageRow& row) {
  std::vector<double> out;
  for (const auto& s : row.shares) out.push_back(s.value_or(-1));
  return out;
}

}  // namespace

TEST_CASE("min_distance_table basics") {
  std::vector<Tract> tracts{make_tract("T1", "PA", 40, -75)};
  SetCatalog catalog;
  catalog.emplace("a", FacilitySet("a", {}));
  auto empty = min_distance_table(tracts, scenario_of({"a"}), catalog);
  REQUIRE(empty.entries.size() == 1);
  CHECK_FALSE(empty.entries[0].nearest);

  catalog.insert_or_assign("a", FacilitySet("a", {make_facility("F1", "PA", 40, -75.01)}));
  auto one = min_distance_table(tracts, scenario_of({"a"}), catalog);
  REQUIRE(one.entries[0].nearest);
  CHECK(one.entries[0].nearest->id == "a/F1");
  CHECK(one.entries[0].nearest->distance.value() == doctest::Approx(0.529).epsilon(0.002));
  CHECK(one.facility_count == 1);

  CHECK_THROWS_AS(min_distance_table(tracts, scenario_of({"nope"}), catalog), UnknownSetError);
}

TEST_CASE("cross-state eligibility") {
  std::vector<Tract> tracts{make_tract("T1", "BB", 40, -75)};
  SetCatalog catalog;
  catalog.emplace("a", FacilitySet("a", {make_facility("F1", "AA", 40, -75.1)}));
  auto s = scenario_of({"a"});
  CHECK_FALSE(min_distance_table(tracts, s, catalog).entries[0].nearest);
  s.cross_state["BB"] = {"AA"};
  auto hit = min_distance_table(tracts, s, catalog).entries[0].nearest;
  REQUIRE(hit);
  CHECK(hit->id == "a/F1");
}

TEST_CASE("region filter") {
  std::vector<Tract> tracts{make_tract("T1", "PA", 40, -75), make_tract("T2", "HI", 21, -157),
                            make_tract("T3", "NJ", 40, -74.5)};
  SetCatalog catalog;
  catalog.emplace("a", FacilitySet("a", {}));
  auto s = scenario_of({"a"});
  CHECK(min_distance_table(tracts, s, catalog).entries.size() == 3);
  s.region = RegionConus{};
  CHECK(min_distance_table(tracts, s, catalog).entries.size() == 2);
  s.region = RegionStates{{"NJ"}};
  auto nj = min_distance_table(tracts, s, catalog);
  REQUIRE(nj.entries.size() == 1);
  CHECK(nj.entries[0].tract_id == "T3");
}

TEST_CASE("threshold_share examples") {
  const auto th = default_thresholds();
  std::vector<Tract> one{make_tract("T1", "PA", 40, -75, 100)};
  CHECK(shares(threshold_share(table_of({{"T1", 0.5}}), one, DemographicGroup::all_adults, th)) ==
        std::vector<double>{100, 100, 100});

  std::vector<Tract> two{make_tract("T1", "PA", 40, -75, 100), make_tract("T2", "PA", 40, -75, 100)};
  auto row = threshold_share(table_of({{"T1", 0.5}, {"T2", 3.0}}), two,
                             DemographicGroup::all_adults, th);
  CHECK(shares(row) == std::vector<double>{50, 50, 100});
  CHECK(row.total == 200);

  auto absent = threshold_share(table_of({{"T1", 0.5}, {"T2", std::nullopt}}), two,
                                DemographicGroup::all_adults, th);
  CHECK(shares(absent) == std::vector<double>{50, 50, 50});
  CHECK(absent.total == 200);
}

TEST_CASE("threshold boundaries are strict") {
  std::vector<Tract> one{make_tract("T1", "PA", 40, -75, 100)};
  auto row = threshold_share(table_of({{"T1", 2.0}}), one, DemographicGroup::all_adults,
                             default_thresholds());
  CHECK(shares(row) == std::vector<double>{0, 0, 100});
}

TEST_CASE("zero-weight rows report absent shares") {
  std::vector<Tract> one{make_tract("T1", "PA", 40, -75, 0)};
  auto row = threshold_share(table_of({{"T1", 0.5}}), one, DemographicGroup::pop_black,
                             default_thresholds());
  CHECK(row.total == 0);
  for (const auto& s : row.shares) CHECK_FALSE(s);
}

TEST_CASE("thresholds must increase") {
  std::vector<Tract> one{make_tract("T1", "PA", 40, -75)};
  CHECK_THROWS_AS(threshold_share(table_of({{"T1", 0.5}}), one, DemographicGroup::all_adults,
                                  {Miles(2), Miles(1)}),
                  std::invalid_argument);
}

TEST_CASE("coverage_table row order") {
  std::vector<Tract> tracts{make_tract("T1", "PA", 40, -75), make_tract("T2", "NJ", 40, -74)};
  auto table = coverage_table(table_of({{"T1", 0.5}, {"T2", 3.0}}), tracts,
                              {DemographicGroup::all_adults, DemographicGroup::pop_black},
                              default_thresholds());
  REQUIRE(table.rows.size() == 6);
  CHECK(table.rows[0].scope.label == "US");
  CHECK(table.rows[1].group == DemographicGroup::pop_black);
  CHECK(table.rows[2].scope.label == "NJ");
  CHECK(table.rows[4].scope.label == "PA");
  CHECK(shares(table.rows[4]) == std::vector<double>{100, 100, 100});

  auto national = coverage_table(table_of({{"T1", 0.5}, {"T2", 3.0}}), tracts,
                                 {DemographicGroup::all_adults}, default_thresholds(), "CONUS",
                                 false);
  REQUIRE(national.rows.size() == 1);
  CHECK(national.rows[0].scope.label == "CONUS");
}

TEST_CASE("svi deciles") {
  CHECK(svi_decile(0.95) == 10);
  CHECK(svi_decile(0.15) == 2);
  CHECK(svi_decile(1.0) == 10);
  CHECK(svi_decile(0.0) == 1);
  CHECK(svi_decile(0.1) == 2);
  CHECK(svi_decile(0.0999) == 1);
  CHECK(svi_decile(0.9) == 10);
}

TEST_CASE("svi_decile_distribution") {
  std::vector<Tract> tracts;
  std::vector<Facility> fs;
  for (int k = 0; k < 10; ++k) {
    auto t = make_tract("T" + std::to_string(k), "PA", 40 + k, -75);
    t.svi = SviPercentile(k / 10.0 + 0.05);
    tracts.push_back(t);
    fs.push_back(make_facility("F" + std::to_string(k), "PA", 40 + k, -75.001));
  }
  auto h = svi_decile_distribution(FacilitySet("s", fs), tracts);
  CHECK(h.matched == 10);
  CHECK(h.unmatched == 0);
  for (double s : h.shares()) CHECK(s == 10.0);

  auto empty = svi_decile_distribution(FacilitySet("s", {}), tracts);
  CHECK(empty.matched == 0);
  for (double s : empty.shares()) CHECK(s == 0.0);
}

TEST_CASE("svi assignment honours explicit tract ids and state") {
  auto a = make_tract("A", "PA", 40, -75);
  a.svi = SviPercentile(0.95);
  auto b = make_tract("B", "NJ", 40, -75.001);
  b.svi = SviPercentile(0.15);
  auto c = make_tract("C", "PA", 45, -75);
  std::vector<Tract> tracts{a, b, c};

  auto f1 = make_facility("F1", "PA", 40, -75.001);  // nearest centroid is B, but B is NJ
  auto f2 = make_facility("F2", "PA", 40, -75);
  f2.tract_id = "B";
  auto f3 = make_facility("F3", "PA", 45, -75);  // tract C lacks SVI
  auto f4 = make_facility("F4", "PA", 45, -75);
  f4.tract_id = "missing";
  auto h = svi_decile_distribution(FacilitySet("s", {f1, f2, f3, f4}), tracts);
  CHECK(h.counts[9] == 1);
  CHECK(h.counts[1] == 1);
  CHECK(h.matched == 2);
  CHECK(h.unmatched == 2);
}

TEST_CASE("stores_per_100k") {
  auto pa = make_tract("T1", "PA", 40, -75, 100000);
  auto nj = make_tract("T2", "NJ", 40, -74, 50000);
  auto nd = make_tract("T3", "ND", 47, -100, 0);
  FacilitySet fs("s", {make_facility("F1", "PA", 40, -75), make_facility("F2", "PA", 40, -75),
                       make_facility("F3", "ND", 47, -100)});
  auto rows = stores_per_100k(fs, {pa, nj, nd});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].state == "ND");
  CHECK(rows[0].facilities == 1);
  CHECK_FALSE(rows[0].per_100k);
  CHECK(rows[1].state == "NJ");
  CHECK(rows[1].per_100k == 0.0);
  CHECK(rows[2].state == "PA");
  CHECK(rows[2].per_100k == 2.0);
}

TEST_CASE("compare_scenarios") {
  std::vector<Tract> tracts{make_tract("T1", "PA", 40, -75, 100), make_tract("T2", "PA", 40, -75, 300)};
  const auto th = default_thresholds();
  auto base = table_of({{"T1", 0.5}, {"T2", std::nullopt}});
  auto same = compare_scenarios(base, base, tracts, {DemographicGroup::all_adults}, th);
  for (const auto& row : same.rows) {
    for (const auto& d : row.delta) CHECK(*d == 0.0);
  }

  auto aug = table_of({{"T1", 0.5}, {"T2", 0.3}});
  auto gained = compare_scenarios(base, aug, tracts, {DemographicGroup::all_adults}, th);
  REQUIRE(gained.rows.size() == 1);
  for (const auto& d : gained.rows[0].delta) CHECK(*d == 75.0);
  REQUIRE(gained.tracts.size() == 2);
  CHECK_FALSE(gained.tracts[1].base);
  CHECK_FALSE(gained.tracts[1].delta_miles);
  CHECK(*gained.tracts[0].delta_miles == 0.0);

  auto other = table_of({{"T1", 0.5}});
  CHECK_THROWS_AS(compare_scenarios(base, other, tracts, {DemographicGroup::all_adults}, th),
                  UniverseMismatchError);
}

TEST_CASE("goal_check") {
  std::vector<Tract> tracts{make_tract("T1", "PA", 40, -75, 863), make_tract("T2", "PA", 40, -75, 137)};
  auto not_met = goal_check(table_of({{"T1", 4.0}, {"T2", std::nullopt}}), tracts);
  CHECK(*not_met.share == 86.3);
  CHECK_FALSE(not_met.met);

  std::vector<Tract> more{make_tract("T1", "PA", 40, -75, 943), make_tract("T2", "PA", 40, -75, 57)};
  auto met = goal_check(table_of({{"T1", 4.0}, {"T2", 7.0}}), more);
  CHECK(*met.share == 94.3);
  CHECK(met.met);

  std::vector<Tract> one{make_tract("T1", "PA", 40, -75)};
  auto full = goal_check(table_of({{"T1", 0.1}}), one);
  CHECK(*full.share == 100.0);
  CHECK(full.met);
}

TEST_CASE("property: pipeline equals brute force and shares stay ordered") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 10; ++round) {
    auto inst = testing::random_instance(rng, 400, 150, 4, 2.0);
    SetCatalog catalog;
    catalog.emplace("a", FacilitySet("a", inst.facilities));
    const FacilitySet qualified = scenario_union(scenario_of({"a"}), catalog);
    auto table = min_distance_table(inst.tracts, scenario_of({"a"}), catalog, {.threads = 3});
    REQUIRE(table.entries.size() == inst.tracts.size());
    for (std::size_t i = 0; i < inst.tracts.size(); ++i) {
      auto brute = nearest_bruteforce(qualified, inst.tracts[i].centroid,
                                      {inst.tracts[i].state.str()});
      CHECK(table.entries[i].nearest == brute);
    }
    auto cov = coverage_table(table, inst.tracts,
                              std::vector<DemographicGroup>(std::begin(kAllGroups), std::end(kAllGroups)),
                              default_thresholds());
    for (const auto& row : cov.rows) {
      for (std::size_t k = 0; k < row.shares.size(); ++k) {
        if (!row.shares[k]) continue;
        CHECK(*row.shares[k] >= 0.0);
        CHECK(*row.shares[k] <= 100.0);
        if (k) CHECK(*row.shares[k - 1] <= *row.shares[k]);
      }
    }
  }
}

TEST_CASE("property: hispanic and non-hispanic combine to the population total") {
  std::mt19937_64 rng(23);
  auto inst = testing::random_instance(rng, 500, 100, 3);
  SetCatalog catalog;
  catalog.emplace("a", FacilitySet("a", inst.facilities));
  auto table = min_distance_table(inst.tracts, scenario_of({"a"}), catalog);
  const auto th = default_thresholds();
  auto h = threshold_share(table, inst.tracts, DemographicGroup::pop_hispanic, th);
  auto n = threshold_share(table, inst.tracts, DemographicGroup::pop_non_hispanic, th);
  Count pop = 0;
  std::vector<Count> covered(th.size(), 0);
  for (std::size_t i = 0; i < inst.tracts.size(); ++i) {
    const Count w = inst.tracts[i].counts.fields().pop_total;
    pop += w;
    for (std::size_t k = 0; k < th.size(); ++k) {
      if (table.entries[i].nearest && table.entries[i].nearest->distance < th[k]) covered[k] += w;
    }
  }
  CHECK(h.total + n.total == pop);
  for (std::size_t k = 0; k < th.size(); ++k) CHECK(h.covered[k] + n.covered[k] == covered[k]);
}

TEST_CASE("property: superset scenarios never lose coverage") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 10; ++round) {
    auto inst = testing::random_instance(rng, 300, 240, 4);
    SetCatalog catalog;
    catalog.emplace("a", FacilitySet("a", {inst.facilities.begin(), inst.facilities.begin() + 80}));
    catalog.emplace("b", FacilitySet("b", {inst.facilities.begin() + 80, inst.facilities.begin() + 160}));
    catalog.emplace("c", FacilitySet("c", {inst.facilities.begin() + 160, inst.facilities.end()}));
    auto small = min_distance_table(inst.tracts, scenario_of({"a"}), catalog);
    auto big = min_distance_table(inst.tracts, scenario_of({"a", "c"}), catalog);
    for (std::size_t i = 0; i < small.entries.size(); ++i) {
      if (small.entries[i].nearest) {
        REQUIRE(big.entries[i].nearest);
        CHECK(big.entries[i].nearest->distance <= small.entries[i].nearest->distance);
      }
    }
    auto delta = compare_scenarios(small, big, inst.tracts,
                                   std::vector<DemographicGroup>(std::begin(kAllGroups), std::end(kAllGroups)),
                                   default_thresholds(), "US", true);
    for (const auto& row : delta.rows) {
      for (const auto& d : row.delta) {
        if (d) CHECK(*d >= 0.0);
      }
    }
  }
}

TEST_CASE("property: thread count does not change results") {
  std::mt19937_64 rng(47);
  auto inst = testing::random_instance(rng, 5000, 800, 5);
  SetCatalog catalog;
  catalog.emplace("a", FacilitySet("a", inst.facilities));
  auto one = min_distance_table(inst.tracts, scenario_of({"a"}), catalog, {.threads = 1});
  for (unsigned t : {2u, 3u, 8u}) {
    auto many = min_distance_table(inst.tracts, scenario_of({"a"}), catalog, {.threads = t});
    REQUIRE(many.entries.size() == one.entries.size());
    for (std::size_t i = 0; i < one.entries.size(); ++i) {
      CHECK(many.entries[i].tract_id == one.entries[i].tract_id);
      CHECK(many.entries[i].nearest == one.entries[i].nearest);
    }
  }
}
