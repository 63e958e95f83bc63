#pragma once

#include <array>
#include <compare>
#include <numbers>

namespace proxima {

/// Mean Earth radius (IUGG), statute miles.
inline constexpr double kEarthRadiusMiles = 3958.7613;

/// Half the circumference of the model sphere; the largest possible distance.
inline constexpr double kMaxDistanceMiles = std::numbers::pi * kEarthRadiusMiles;

/// Latitude/longitude in degrees. Out-of-range or non-finite values throw
/// std::invalid_argument, so every live instance is valid.
class Coordinate {
 public:
  Coordinate(double lat, double lon);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  /// Unit vector on the sphere (x toward lon 0 on the equator, z toward the north pole).
  std::array<double, 3> unit_vector() const noexcept;

  friend bool operator==(const Coordinate&, const Coordinate&) = default;

 private:
  double lat_;
  double lon_;
};

/// Nonnegative finite distance in statute miles.
class Miles {
 public:
  constexpr Miles() noexcept = default;
  explicit Miles(double value);

  double value() const noexcept { return value_; }

  friend auto operator<=>(const Miles&, const Miles&) = default;

 private:
  double value_ = 0.0;
};

/// Great-circle distance on the model sphere. Exactly symmetric: the
/// arguments are put in a canonical order before evaluation.
Miles haversine_miles(const Coordinate& a, const Coordinate& b) noexcept;

/// Chord length on the unit sphere corresponding to a great-circle distance.
double chord_for_miles(double miles) noexcept;

}  // namespace proxima
