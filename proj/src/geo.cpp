#include "proxima/geo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace proxima {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

Coordinate::Coordinate(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon)) {
    throw std::invalid_argument("coordinate is not finite");
  }
  if (lat < -90.0 || lat > 90.0) {
    throw std::invalid_argument("latitude out of range: " + std::to_string(lat));
  }
  if (lon < -180.0 || lon > 180.0) {
    throw std::invalid_argument("longitude out of range: " + std::to_string(lon));
  }
}

std::array<double, 3> Coordinate::unit_vector() const noexcept {
  const double phi = lat_ * kDegToRad;
  const double lambda = lon_ * kDegToRad;
  const double c = std::cos(phi);
  return {c * std::cos(lambda), c * std::sin(lambda), std::sin(phi)};
}

Miles::Miles(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::invalid_argument("distance must be finite and nonnegative");
  }
}

Miles haversine_miles(const Coordinate& a, const Coordinate& b) noexcept {
  const Coordinate* p = &a;
  const Coordinate* q = &b;
  if (std::pair(q->lat(), q->lon()) < std::pair(p->lat(), p->lon())) {
    std::swap(p, q);
  }
  const double phi1 = p->lat() * kDegToRad;
  const double phi2 = q->lat() * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (q->lon() - p->lon()) * kDegToRad;

  const double s_phi = std::sin(dphi * 0.5);
  const double s_lambda = std::sin(dlambda * 0.5);
  double h = s_phi * s_phi + std::cos(phi1) * std::cos(phi2) * s_lambda * s_lambda;
  h = std::clamp(h, 0.0, 1.0);
  const double d = 2.0 * kEarthRadiusMiles * std::asin(std::sqrt(h));
  return Miles(std::min(d, kMaxDistanceMiles));
}

double chord_for_miles(double miles) noexcept {
  return 2.0 * std::sin(miles / (2.0 * kEarthRadiusMiles));
}

}  // namespace proxima
