#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "../oracles/haversine_oracle.hpp"
#include "../support.hpp"
#include "proxima/geo.hpp"

using proxima::Coordinate;
using proxima::haversine_miles;
using proxima::Miles;

TEST_CASE("coordinate validation") {
  CHECK_NOTHROW(Coordinate(90.0, 180.0));
  CHECK_NOTHROW(Coordinate(-90.0, -180.0));
  CHECK_THROWS_AS(Coordinate(90.0001, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Coordinate(0.0, -180.5), std::invalid_argument);
  CHECK_THROWS_AS(Coordinate(std::nan(""), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Coordinate(0.0, INFINITY), std::invalid_argument);
}

TEST_CASE("miles rejects negative and non-finite") {
  CHECK_THROWS(Miles(-0.1));
  CHECK_THROWS(Miles(std::nan("")));
  CHECK(Miles(0.0).value() == 0.0);
}

TEST_CASE("haversine worked examples") {
  CHECK(haversine_miles({40.0, -75.0}, {40.0, -75.0}).value() == 0.0);
  // antipodal: half the circumference, pi * 3958.7613 = 12436.8154
  CHECK(std::abs(haversine_miles({0.0, 0.0}, {0.0, 180.0}).value() - 12436.8154) < 0.01);
  CHECK(haversine_miles({0.0, 0.0}, {0.0, 180.0}).value() == proxima::kMaxDistanceMiles);
  CHECK(std::abs(haversine_miles({0.0, 0.0}, {1.0, 0.0}).value() - 69.093) < 0.005);
  CHECK(std::abs(haversine_miles({40.0, -75.0}, {40.0, -75.01}).value() - 0.529) < 0.005);
}

TEST_CASE("longitude +-180 are the same meridian") {
  CHECK(haversine_miles({10.0, 180.0}, {10.0, -180.0}).value() < 1e-9);
}

TEST_CASE("chord length matches unit-vector distance") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto a = testing::random_coordinate(rng);
    const auto b = testing::random_coordinate(rng);
    const auto va = a.unit_vector(), vb = b.unit_vector();
    const double chord = std::hypot(va[0] - vb[0], va[1] - vb[1], va[2] - vb[2]);
    CHECK(proxima::chord_for_miles(haversine_miles(a, b).value()) ==
          doctest::Approx(chord).epsilon(1e-9));
  }
}

TEST_CASE("distance kernel properties on random pairs") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20000; ++i) {
    const auto a = testing::random_coordinate(rng);
    const auto b = testing::random_coordinate(rng);
    const auto c = testing::random_coordinate(rng);
    const double ab = haversine_miles(a, b).value();
    REQUIRE(ab == haversine_miles(b, a).value());
    REQUIRE(haversine_miles(a, a).value() == 0.0);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab <= proxima::kMaxDistanceMiles);

    const double bc = haversine_miles(b, c).value();
    const double ac = haversine_miles(a, c).value();
    REQUIRE(ac <= (ab + bc) * (1.0 + 1e-9));

    REQUIRE(std::abs(ab - oracle::vector_miles(a.lat(), a.lon(), b.lat(), b.lon())) < 1e-6);
    if (ab > 0.1) {
      REQUIRE(std::abs(ab - oracle::law_of_cosines_miles(a.lat(), a.lon(), b.lat(), b.lon())) <
              1e-6);
    }
  }
}

TEST_CASE("short separations agree with the oracle") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> offset(-0.01, 0.01);
  for (int i = 0; i < 5000; ++i) {
    const auto a = testing::random_in_box(rng, 25.0, -120.0, 20.0);
    const Coordinate b(a.lat() + offset(rng), a.lon() + offset(rng));
    CHECK(std::abs(haversine_miles(a, b).value() -
                   oracle::vector_miles(a.lat(), a.lon(), b.lat(), b.lon())) < 1e-9);
  }
}
