#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "../support.hpp"
#include "proxima/index.hpp"

using namespace proxima;
using testing::make_facility;

TEST_CASE("empty index has no answer") {
  FacilitySet none("s", {});
  auto idx = build_index(none);
  CHECK(idx.size() == 0);
  CHECK_FALSE(nearest(idx, Coordinate(40, -75), {"PA"}));
  CHECK_FALSE(nearest(idx, Coordinate(40, -75), {}));
}

TEST_CASE("partition sizes sum to the total") {
  std::mt19937_64 rng(3);
  auto inst = testing::random_instance(rng, 0, 1000, 7);
  FacilitySet set("s", inst.facilities);
  auto idx = build_index(set);
  std::size_t total = 0;
  for (const auto& [state, n] : idx.partition_sizes()) total += n;
  CHECK(total == 1000);
  CHECK(idx.size() == 1000);
}

TEST_CASE("single facility example") {
  FacilitySet set("s", {make_facility("F1", "PA", 40.0, -75.01)});
  auto hit = nearest(build_index(set), Coordinate(40.0, -75.0), {"PA"});
  REQUIRE(hit);
  CHECK(hit->id == "F1");
  CHECK(hit->distance.value() == doctest::Approx(0.529).epsilon(0.002));
}

TEST_CASE("empty partition for a state") {
  FacilitySet set("s", {make_facility("F1", "AA", 40.0, -75.0)});
  auto idx = build_index(set);
  CHECK_FALSE(nearest(idx, Coordinate(40.0, -75.0), {"BB"}));
  CHECK(nearest(idx, Coordinate(40.0, -75.0), {"AA", "BB"})->id == "F1");
}

TEST_CASE("ties resolve to the smallest id") {
  FacilitySet set("s", {make_facility("B", "PA", 40.0, -75.01), make_facility("A", "PA", 40.0, -74.99)});
  auto hit = nearest(build_index(set), Coordinate(40.0, -75.0), {"PA"});
  auto brute = nearest_bruteforce(set, Coordinate(40.0, -75.0), {"PA"});
  REQUIRE(hit);
  CHECK(hit->id == "A");
  CHECK(*hit == *brute);

  FacilitySet same("s", {make_facility("Z", "PA", 40.5, -75.5), make_facility("M", "PA", 40.5, -75.5)});
  CHECK(nearest(build_index(same), Coordinate(40, -75), {"PA"})->id == "M");
}

TEST_CASE("union index over several sets") {
  FacilitySet a("a", {make_facility("F1", "PA", 41, -75)});
  FacilitySet b("b", {make_facility("F2", "PA", 40.1, -75)});
  auto idx = build_index(std::vector<const FacilitySet*>{&a, &b});
  CHECK(idx.size() == 2);
  CHECK(nearest(idx, Coordinate(40, -75), {"PA"})->id == "F2");
}

TEST_CASE("randomized equivalence with brute force") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 20; ++round) {
    auto inst = testing::random_instance(rng, 300, 200, 5);
    FacilitySet set("s", inst.facilities);
    auto idx = build_index(set);
    const auto names = testing::state_names(5);
    for (const auto& t : inst.tracts) {
      std::set<std::string> states{t.state.str()};
      if (round % 2) states.insert(names[(t.id.size() + round) % 5]);
      auto fast = nearest(idx, t.centroid, states);
      auto slow = nearest_bruteforce(set, t.centroid, states);
      REQUIRE(fast.has_value() == slow.has_value());
      if (fast) {
        CHECK(fast->id == slow->id);
        CHECK(fast->distance.value() == slow->distance.value());
      }
    }
  }
}

TEST_CASE("global queries on the whole sphere") {
  std::mt19937_64 rng(99);
  std::vector<Facility> fs;
  for (int i = 0; i < 500; ++i) {
    fs.push_back(Facility{"F" + std::to_string(i), "c", StateCode("AA"), testing::random_coordinate(rng)});
  }
  FacilitySet set("s", fs);
  auto idx = build_index(set);
  for (int i = 0; i < 2000; ++i) {
    auto q = testing::random_coordinate(rng);
    CHECK(*nearest(idx, q, {"AA"}) == *nearest_bruteforce(set, q, {"AA"}));
  }
}

TEST_CASE("clustered duplicates") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> cell(0, 4);
  std::vector<Facility> fs;
  for (int i = 0; i < 400; ++i) {
    fs.push_back(make_facility("F" + std::to_string(i), "PA", 40 + cell(rng) * 1e-4, -75 + cell(rng) * 1e-4));
  }
  FacilitySet set("s", fs);
  auto idx = build_index(set);
  for (int i = 0; i < 500; ++i) {
    auto q = testing::random_in_box(rng, 39.9995, -75.0005, 0.0015);
    CHECK(*nearest(idx, q, {"PA"}) == *nearest_bruteforce(set, q, {"PA"}));
  }
}

TEST_CASE("adding facilities never increases the nearest distance") {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 10; ++round) {
    auto inst = testing::random_instance(rng, 200, 300, 3);
    std::vector<Facility> half(inst.facilities.begin(), inst.facilities.begin() + 150);
    auto small = build_index(FacilitySet("s", half));
    auto big = build_index(FacilitySet("s", inst.facilities));
    for (const auto& t : inst.tracts) {
      auto a = nearest(small, t.centroid, {t.state.str()});
      auto b = nearest(big, t.centroid, {t.state.str()});
      if (a) {
        REQUIRE(b);
        CHECK(b->distance <= a->distance);
      }
    }
  }
}
