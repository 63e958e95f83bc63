#include "proxima/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "proxima/report.hpp"

namespace proxima {

namespace {

std::string join_messages(const std::vector<FieldError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "; ";
    out += e.field + ": " + e.message;
  }
  return out;
}

/// Field-by-field reader that records problems instead of stopping at the first.
class BodyReader {
 public:
  BodyReader(const Json& body, std::set<std::string> allowed) : body_(body) {
    if (!body.is_object()) {
      fail("body", "request body must be a JSON object");
      return;
    }
    for (const auto& [key, _] : body.items()) {
      if (!allowed.contains(key)) fail(key, "unknown field");
    }
  }

  void fail(std::string field, std::string message) {
    errors_.push_back({std::move(field), std::move(message)});
  }
  bool has(const std::string& key) const { return body_.is_object() && body_.contains(key); }
  const Json& at(const std::string& key) const { return body_.at(key); }

  std::vector<std::string> set_list(const std::string& key, bool required) {
    std::vector<std::string> out;
    if (!has(key)) {
      if (required && body_.is_object()) fail(key, "required");
      return out;
    }
    const auto& v = at(key);
    if (!v.is_array() || v.empty()) {
      fail(key, "must be a nonempty array of set names");
      return out;
    }
    for (const auto& s : v) {
      if (!s.is_string() || s.get<std::string>().empty()) {
        fail(key, "set names must be nonempty strings");
        return {};
      }
      out.push_back(s.get<std::string>());
    }
    return out;
  }

  void common(AnalysisRequest& req) {
    auto& sc = req.scenario;
    if (has("name")) {
      if (at("name").is_string()) sc.name = at("name").get<std::string>();
      else fail("name", "must be a string");
    }
    if (has("region")) read_region(sc);
    if (has("thresholds")) read_thresholds(sc);
    if (has("groups")) read_groups(req);
    if (has("cross_state")) read_cross_state(sc);
    if (has("per_state")) {
      if (at("per_state").is_boolean()) req.per_state = at("per_state").get<bool>();
      else fail("per_state", "must be a boolean");
    }
    if (has("decimals")) {
      const auto& d = at("decimals");
      if (d.is_number_integer() && d.get<long long>() >= 0 && d.get<long long>() <= 10) {
        req.decimals = d.get<int>();
      } else {
        fail("decimals", "must be an integer in [0, 10]");
      }
    }
    if (has("goal")) read_goal(req);
  }

  void finish() const {
    if (!errors_.empty()) throw RequestError(errors_);
  }

 private:
  void read_region(Scenario& sc) {
    const auto& r = at("region");
    try {
      if (r.is_string()) {
        sc.region = parse_region(r.get<std::string>());
      } else if (r.is_array() && !r.empty()) {
        RegionStates states;
        for (const auto& s : r) states.states.insert(StateCode(s.get<std::string>()).str());
        sc.region = states;
      } else {
        fail("region", "must be \"all\", \"conus\" or an array of state codes");
      }
    } catch (const std::exception&) {
      fail("region", "must be \"all\", \"conus\" or an array of state codes");
    }
  }

  void read_thresholds(Scenario& sc) {
    const auto& t = at("thresholds");
    if (!t.is_array() || t.empty()) {
      fail("thresholds", "must be a nonempty array of numbers");
      return;
    }
    std::vector<Miles> out;
    for (const auto& v : t) {
      if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() <= 0.0) {
        fail("thresholds", "thresholds must be positive numbers");
        return;
      }
      out.emplace_back(v.get<double>());
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (!(out[i - 1] < out[i])) {
        fail("thresholds", "thresholds must be strictly increasing");
        return;
      }
    }
    sc.thresholds = std::move(out);
  }

  void read_groups(AnalysisRequest& req) {
    const auto& g = at("groups");
    if (!g.is_array() || g.empty()) {
      fail("groups", "must be a nonempty array of group names");
      return;
    }
    std::vector<DemographicGroup> out;
    for (const auto& v : g) {
      auto parsed = v.is_string() ? parse_group(v.get<std::string>()) : std::nullopt;
      if (!parsed) {
        fail("groups", "unknown group '" + (v.is_string() ? v.get<std::string>() : v.dump()) + "'");
        return;
      }
      if (std::find(out.begin(), out.end(), *parsed) != out.end()) {
        fail("groups", "group '" + v.get<std::string>() + "' repeated");
        return;
      }
      out.push_back(*parsed);
    }
    req.groups = std::move(out);
  }

  void read_cross_state(Scenario& sc) {
    const auto& c = at("cross_state");
    if (!c.is_object()) {
      fail("cross_state", "must be an object mapping a state to an array of states");
      return;
    }
    try {
      for (const auto& [state, extra] : c.items()) {
        std::set<std::string> borrowed;
        if (!extra.is_array()) throw std::invalid_argument("not an array");
        for (const auto& s : extra) borrowed.insert(StateCode(s.get<std::string>()).str());
        sc.cross_state[StateCode(state).str()] = std::move(borrowed);
      }
    } catch (const std::exception&) {
      fail("cross_state", "must be an object mapping a state to an array of states");
    }
  }

  void read_goal(AnalysisRequest& req) {
    const auto& g = at("goal");
    if (!g.is_object()) {
      fail("goal", "must be an object {miles, target, group}");
      return;
    }
    for (const auto& [key, v] : g.items()) {
      if (key == "miles") {
        if (v.is_number() && std::isfinite(v.get<double>()) && v.get<double>() > 0.0) {
          req.goal_threshold = Miles(v.get<double>());
        } else {
          fail("goal.miles", "must be a positive number");
        }
      } else if (key == "target") {
        if (v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 100.0) {
          req.goal_target = v.get<double>();
        } else {
          fail("goal.target", "must be a percentage in [0, 100]");
        }
      } else if (key == "group") {
        auto parsed = v.is_string() ? parse_group(v.get<std::string>()) : std::nullopt;
        if (parsed) req.goal_group = *parsed;
        else fail("goal.group", "unknown group");
      } else {
        fail("goal." + key, "unknown field");
      }
    }
  }

  const Json& body_;
  std::vector<FieldError> errors_;
};

std::string default_name(const std::vector<std::string>& sets) {
  std::string out;
  for (const auto& s : sets) out += (out.empty() ? "" : "+") + s;
  return out;
}

Json region_json(const Region& region) {
  if (std::holds_alternative<RegionAll>(region)) return "all";
  if (std::holds_alternative<RegionConus>(region)) return "conus";
  return std::get<RegionStates>(region).states;
}

}  // namespace

RequestError::RequestError(std::vector<FieldError> errors)
    : std::runtime_error(join_messages(errors)), errors_(std::move(errors)) {}

Json RequestError::to_json() const {
  Json out;
  out["error"] = "invalid request";
  Json list = Json::array();
  for (const auto& e : errors_) list.push_back({{"field", e.field}, {"message", e.message}});
  out["errors"] = list;
  return out;
}

AnalysisRequest parse_analysis_request(const Json& body) {
  BodyReader reader(body, {"name", "sets", "region", "thresholds", "groups", "cross_state",
                           "per_state", "decimals", "goal"});
  AnalysisRequest req;
  req.scenario.sets = reader.set_list("sets", true);
  reader.common(req);
  reader.finish();
  if (req.scenario.name.empty()) req.scenario.name = default_name(req.scenario.sets);
  return req;
}

CompareRequest parse_compare_request(const Json& body) {
  BodyReader reader(body, {"name", "base", "augmented", "region", "thresholds", "groups",
                           "cross_state", "per_state", "decimals", "goal"});
  CompareRequest req;
  req.base.scenario.sets = reader.set_list("base", true);
  req.augmented_sets = reader.set_list("augmented", true);
  reader.common(req.base);
  reader.finish();
  if (req.base.scenario.name.empty()) req.base.scenario.name = default_name(req.base.scenario.sets);
  return req;
}

SviHistRequest parse_svi_hist_request(const Json& body) {
  BodyReader reader(body, {"sets", "decimals"});
  SviHistRequest req;
  req.sets = reader.set_list("sets", true);
  AnalysisRequest scratch;
  reader.common(scratch);
  reader.finish();
  req.decimals = scratch.decimals;
  return req;
}

Json scenario_echo(const AnalysisRequest& request) {
  const auto& sc = request.scenario;
  Json out;
  out["name"] = sc.name;
  out["sets"] = sc.sets;
  out["region"] = region_json(sc.region);
  Json thresholds = Json::array();
  for (const auto& t : sc.thresholds) thresholds.push_back(t.value());
  out["thresholds"] = thresholds;
  Json groups = Json::array();
  for (auto g : request.groups) groups.push_back(std::string(to_string(g)));
  out["groups"] = groups;
  Json cross = Json::object();
  for (const auto& [state, extra] : sc.cross_state) cross[state] = extra;
  out["cross_state"] = cross;
  out["per_state"] = request.per_state;
  out["decimals"] = request.decimals;
  out["goal"] = {{"miles", request.goal_threshold.value()},
                 {"target", request.goal_target},
                 {"group", std::string(to_string(request.goal_group))}};
  return out;
}

std::string cache_key(const Json& echo) { return sha256_hex(echo.dump()).substr(0, 16); }

Engine::Engine(Dataset data, unsigned threads) : data_(std::move(data)) {
  options_.threads = threads;
  options_.non_continental = data_.non_continental;
}

void Engine::require_sets(const std::vector<std::string>& names) const {
  for (const auto& n : names) {
    if (!data_.sets.contains(n)) throw UnknownSetError(n);
  }
}

std::shared_ptr<const FacilityIndex> Engine::index_for(const Scenario& scenario) const {
  require_sets(scenario.sets);
  std::string key;
  for (const auto& n : union_key(scenario)) key += n + "\n";

  std::promise<std::shared_ptr<const FacilityIndex>> promise;
  std::shared_future<std::shared_ptr<const FacilityIndex>> ready;
  bool builder = false;
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ready = it->second;
    } else {
      ready = promise.get_future().share();
      cache_.emplace(key, ready);
      builder = true;
    }
  }
  // Only the first requester for a key builds; later ones wait on the future.
  if (builder) {
    try {
      promise.set_value(
          std::make_shared<const FacilityIndex>(build_scenario_index(scenario, data_.sets)));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(cache_mutex_);
      cache_.erase(key);
    }
  }
  return ready.get();
}

std::size_t Engine::cached_indexes() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

DistanceTable Engine::distances(const Scenario& scenario) const {
  scenario.validate();
  auto index = index_for(scenario);
  return min_distance_table(data_.tracts, scenario, *index, options_);
}

AnalysisResult Engine::analyze(const AnalysisRequest& request) const {
  const auto& sc = request.scenario;
  AnalysisResult out;
  out.distances = distances(sc);
  out.coverage = coverage_table(out.distances, data_.tracts, request.groups, sc.thresholds,
                                region_label(sc.region), request.per_state);
  out.goal = goal_check(out.distances, data_.tracts, request.goal_threshold, request.goal_target,
                        request.goal_group);

  std::vector<Tract> in_scope;
  for (const auto& t : data_.tracts) {
    if (in_region(t, sc.region, data_.non_continental)) in_scope.push_back(t);
  }
  out.per_capita = stores_per_100k(scenario_union(sc, data_.sets), in_scope);
  return out;
}

ScenarioDelta Engine::compare(const CompareRequest& request) const {
  const auto& base_sc = request.base.scenario;
  Scenario aug_sc = base_sc;
  aug_sc.sets = request.augmented_sets;
  aug_sc.name = default_name(request.augmented_sets);
  require_sets(base_sc.sets);
  require_sets(aug_sc.sets);
  const auto base = distances(base_sc);
  const auto aug = distances(aug_sc);
  return compare_scenarios(base, aug, data_.tracts, request.base.groups, base_sc.thresholds,
                           region_label(base_sc.region), request.base.per_state);
}

DecileHistogram Engine::svi_hist(const SviHistRequest& request) const {
  require_sets(request.sets);
  Scenario sc;
  sc.sets = request.sets;
  return svi_decile_distribution(scenario_union(sc, data_.sets), data_.tracts);
}

Json Engine::analyze_json(const AnalysisRequest& request) const {
  const auto result = analyze(request);
  const auto echo = scenario_echo(request);
  Json out;
  out["scenario"] = echo;
  out["cache_key"] = cache_key(echo);
  out["tract_count"] = result.distances.entries.size();
  out["facility_count"] = result.distances.facility_count;
  out["coverage"] = report::coverage_json(result.coverage, request.decimals);
  out["goal"] = report::goal_json(result.goal, request.decimals);
  out["per_capita"] = report::per_capita_json(result.per_capita, request.decimals);
  return out;
}

Json Engine::compare_json(const CompareRequest& request) const {
  const auto delta = compare(request);
  AnalysisRequest aug = request.base;
  aug.scenario.sets = request.augmented_sets;
  aug.scenario.name = default_name(request.augmented_sets);
  Json echo;
  echo["base"] = scenario_echo(request.base);
  echo["augmented"] = scenario_echo(aug);
  Json out;
  out["scenario"] = echo;
  out["cache_key"] = cache_key(echo);
  out["delta"] = report::delta_json(delta, request.base.decimals);
  return out;
}

Json Engine::svi_hist_json(const SviHistRequest& request) const {
  const auto h = svi_hist(request);
  Json echo;
  echo["sets"] = request.sets;
  echo["decimals"] = request.decimals;
  Json out;
  out["scenario"] = echo;
  out["cache_key"] = cache_key(echo);
  out["histogram"] = report::decile_json(h, request.decimals);
  return out;
}

Json Engine::sets_json() const {
  Json out = Json::array();
  for (const auto& name : data_.set_order) {
    out.push_back({{"name", name}, {"count", data_.sets.at(name).size()}});
  }
  return out;
}

Json Engine::meta_json() const {
  std::set<std::string> states;
  for (const auto& t : data_.tracts) states.insert(t.state.str());
  Json groups = Json::array();
  for (auto g : kAllGroups) groups.push_back(std::string(to_string(g)));
  Json out;
  out["regions"] = {"all", "conus", "states"};
  out["groups"] = groups;
  out["states"] = states;
  out["non_continental"] = data_.non_continental;
  out["default_thresholds"] = {1.0, 2.0, 5.0};
  out["tract_count"] = data_.tracts.size();
  return out;
}

}  // namespace proxima
