#include "proxima/index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace proxima {

namespace {

constexpr std::uint32_t kLeafSize = 8;

// Relative and absolute slack on the chord pruning bound. Round-off in the
// embedding and in the haversine kernel is ~1e-15; the slack only costs a
// few extra leaf visits and keeps the search exact.
constexpr double kPruneRelSlack = 1e-9;
constexpr double kPruneAbsSlack = 1e-12;

bool better(double miles, const std::string& id, double best_miles, const std::string* best_id) {
  if (best_id == nullptr) return true;
  if (miles != best_miles) return miles < best_miles;
  return id < *best_id;
}

}  // namespace

SpatialIndex::SpatialIndex(std::vector<IndexedPoint> points) {
  std::map<std::string, std::vector<IndexedPoint*>> by_state;
  for (auto& p : points) by_state[p.state].push_back(&p);

  // Content is sorted by id inside each partition so the tree shape does
  // not depend on input order.
  for (auto& [state, members] : by_state) {
    std::sort(members.begin(), members.end(),
              [](const IndexedPoint* a, const IndexedPoint* b) { return a->id < b->id; });
    Partition part;
    part.ids.reserve(members.size());
    part.coords.reserve(members.size());
    part.xyz.reserve(members.size());
    for (auto* m : members) {
      part.ids.push_back(std::move(m->id));
      part.coords.push_back(m->coordinate);
      part.xyz.push_back(m->coordinate.unit_vector());
    }
    std::vector<std::uint32_t> order(members.size());
    std::iota(order.begin(), order.end(), 0U);
    build_node(part, order, 0, static_cast<std::uint32_t>(order.size()));

    // Re-lay points in tree order so leaves are contiguous.
    Partition laid;
    laid.nodes = std::move(part.nodes);
    for (auto i : order) {
      laid.ids.push_back(std::move(part.ids[i]));
      laid.coords.push_back(part.coords[i]);
      laid.xyz.push_back(part.xyz[i]);
    }
    size_ += laid.ids.size();
    partitions_.emplace(state, std::move(laid));
  }
}

std::int32_t SpatialIndex::build_node(Partition& p, std::vector<std::uint32_t>& order,
                                      std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo.fill(std::numeric_limits<double>::infinity());
  node.hi.fill(-std::numeric_limits<double>::infinity());
  for (auto i = begin; i < end; ++i) {
    const auto& v = p.xyz[order[i]];
    for (int a = 0; a < 3; ++a) {
      node.lo[a] = std::min(node.lo[a], v[a]);
      node.hi[a] = std::max(node.hi[a], v[a]);
    }
  }
  const auto self = static_cast<std::int32_t>(p.nodes.size());
  p.nodes.push_back(node);
  if (end - begin <= kLeafSize) return self;

  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (node.hi[a] - node.lo[a] > node.hi[axis] - node.lo[axis]) axis = a;
  }
  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     if (p.xyz[x][axis] != p.xyz[y][axis]) return p.xyz[x][axis] < p.xyz[y][axis];
                     return x < y;
                   });
  const auto left = build_node(p, order, begin, mid);
  const auto right = build_node(p, order, mid, end);
  p.nodes[self].left = left;
  p.nodes[self].right = right;
  return self;
}

namespace {

double box_distance_sq(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                       const std::array<double, 3>& q) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    double d = 0.0;
    if (q[a] < lo[a]) d = lo[a] - q[a];
    else if (q[a] > hi[a]) d = q[a] - hi[a];
    s += d * d;
  }
  return s;
}

}  // namespace

void SpatialIndex::search(const Partition& p, std::int32_t node_index, const Coordinate& q,
                          const std::array<double, 3>& qv, Best& best) {
  const Node& node = p.nodes[static_cast<std::size_t>(node_index)];
  if (best.id != nullptr) {
    const double limit = chord_for_miles(best.miles) * (1.0 + kPruneRelSlack) + kPruneAbsSlack;
    if (box_distance_sq(node.lo, node.hi, qv) > limit * limit) return;
  }
  if (node.left < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const double d = haversine_miles(q, p.coords[i]).value();
      if (better(d, p.ids[i], best.miles, best.id)) {
        best.miles = d;
        best.id = &p.ids[i];
      }
    }
    return;
  }
  const auto& l = p.nodes[static_cast<std::size_t>(node.left)];
  const auto& r = p.nodes[static_cast<std::size_t>(node.right)];
  if (box_distance_sq(l.lo, l.hi, qv) <= box_distance_sq(r.lo, r.hi, qv)) {
    search(p, node.left, q, qv, best);
    search(p, node.right, q, qv, best);
  } else {
    search(p, node.right, q, qv, best);
    search(p, node.left, q, qv, best);
  }
}

std::optional<NearestHit> SpatialIndex::nearest(const Coordinate& query,
                                                const std::set<std::string>& states) const {
  Best best{std::numeric_limits<double>::infinity(), nullptr};
  const auto qv = query.unit_vector();
  for (const auto& s : states) {
    auto it = partitions_.find(s);
    if (it == partitions_.end() || it->second.nodes.empty()) continue;
    search(it->second, 0, query, qv, best);
  }
  if (best.id == nullptr) return std::nullopt;
  return NearestHit{*best.id, Miles(best.miles)};
}

std::map<std::string, std::size_t> SpatialIndex::partition_sizes() const {
  std::map<std::string, std::size_t> out;
  for (const auto& [state, part] : partitions_) out.emplace(state, part.ids.size());
  return out;
}

FacilityIndex build_index(const FacilitySet& facilities) {
  return build_index(std::vector<const FacilitySet*>{&facilities});
}

FacilityIndex build_index(const std::vector<const FacilitySet*>& sets) {
  std::vector<IndexedPoint> points;
  for (const auto* set : sets) {
    for (const auto& f : set->facilities()) {
      points.push_back({f.id, f.state.str(), f.coordinate});
    }
  }
  return SpatialIndex(std::move(points));
}

std::optional<NearestHit> nearest(const FacilityIndex& index, const Coordinate& point,
                                  const std::set<std::string>& states) {
  return index.nearest(point, states);
}

std::optional<NearestHit> nearest_bruteforce(const FacilitySet& facilities,
                                             const Coordinate& point,
                                             const std::set<std::string>& states) {
  const Facility* best = nullptr;
  double best_miles = std::numeric_limits<double>::infinity();
  for (const auto& f : facilities.facilities()) {
    if (!states.contains(f.state.str())) continue;
    const double d = haversine_miles(point, f.coordinate).value();
    if (better(d, f.id, best_miles, best ? &best->id : nullptr)) {
      best = &f;
      best_miles = d;
    }
  }
  if (best == nullptr) return std::nullopt;
  return NearestHit{best->id, Miles(best_miles)};
}

}  // namespace proxima
