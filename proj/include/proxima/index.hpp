#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "proxima/geo.hpp"
#include "proxima/model.hpp"

namespace proxima {

struct IndexedPoint {
  std::string id;
  std::string state;
  Coordinate coordinate;
};

struct NearestHit {
  std::string id;
  Miles distance;
  friend bool operator==(const NearestHit&, const NearestHit&) = default;
};

/// Exact nearest-point search on the sphere, partitioned by state. Each
/// partition is a k-d tree over unit-vector embeddings; chord length is
/// monotone in great-circle distance, so pruning on chord bounds is exact.
/// Candidates are always ranked with haversine_miles, ties by smallest id.
/// Immutable after construction; concurrent queries are safe.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<IndexedPoint> points);

  /// Nearest point among the union of the given state partitions.
  std::optional<NearestHit> nearest(const Coordinate& query,
                                    const std::set<std::string>& states) const;

  std::map<std::string, std::size_t> partition_sizes() const;
  std::size_t size() const noexcept { return size_; }

 private:
  struct Node {
    std::array<double, 3> lo;
    std::array<double, 3> hi;
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  struct Partition {
    std::vector<std::string> ids;
    std::vector<Coordinate> coords;
    std::vector<std::array<double, 3>> xyz;
    std::vector<Node> nodes;
  };

  struct Best {
    double miles;
    const std::string* id = nullptr;
  };

  static std::int32_t build_node(Partition& p, std::vector<std::uint32_t>& order,
                                 std::uint32_t begin, std::uint32_t end);
  static void search(const Partition& p, std::int32_t node, const Coordinate& q,
                     const std::array<double, 3>& qv, Best& best);

  std::map<std::string, Partition> partitions_;
  std::size_t size_ = 0;
};

using FacilityIndex = SpatialIndex;

FacilityIndex build_index(const FacilitySet& facilities);
/// Builds one index over the union of several sets.
FacilityIndex build_index(const std::vector<const FacilitySet*>& sets);

std::optional<NearestHit> nearest(const FacilityIndex& index, const Coordinate& point,
                                  const std::set<std::string>& states);

/// Linear-scan reference with the same contract as `nearest`.
std::optional<NearestHit> nearest_bruteforce(const FacilitySet& facilities,
                                             const Coordinate& point,
                                             const std::set<std::string>& states);

}  // namespace proxima
