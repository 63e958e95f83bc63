#pragma once

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "proxima/coverage.hpp"
#include "proxima/store.hpp"

namespace proxima {

using Json = nlohmann::ordered_json;

struct FieldError {
  std::string field;
  std::string message;
};

/// A request body (or its CLI equivalent) failed validation.
class RequestError : public std::runtime_error {
 public:
  explicit RequestError(std::vector<FieldError> errors);
  const std::vector<FieldError>& errors() const noexcept { return errors_; }
  Json to_json() const;

 private:
  std::vector<FieldError> errors_;
};

struct AnalysisRequest {
  Scenario scenario;
  std::vector<DemographicGroup> groups{std::begin(kAllGroups), std::end(kAllGroups)};
  bool per_state = true;
  int decimals = 2;
  Miles goal_threshold{5.0};
  double goal_target = 90.0;
  DemographicGroup goal_group = DemographicGroup::all_adults;
};

struct CompareRequest {
  AnalysisRequest base;  // region, thresholds, groups and options are shared
  std::vector<std::string> augmented_sets;
};

struct SviHistRequest {
  std::vector<std::string> sets;
  int decimals = 2;
};

/// Validates a scenario body: {sets, name?, region?, thresholds?, groups?,
/// cross_state?, per_state?, decimals?, goal?}. Collects every field error.
AnalysisRequest parse_analysis_request(const Json& body);
/// Same fields as an analysis body with `base` and `augmented` set lists
/// in place of `sets`.
CompareRequest parse_compare_request(const Json& body);
SviHistRequest parse_svi_hist_request(const Json& body);

/// Canonical echo of a resolved request; its hash is the cache key.
Json scenario_echo(const AnalysisRequest& request);
std::string cache_key(const Json& echo);

struct AnalysisResult {
  DistanceTable distances;
  CoverageTable coverage;
  GoalCheck goal;
  std::vector<PerCapitaRow> per_capita;
};

/// Analysis over a loaded dataset. Read-only after construction except for
/// the per-union index cache, which is single-flight and thread-safe.
class Engine {
 public:
  explicit Engine(Dataset data, unsigned threads = 0);

  const Dataset& data() const noexcept { return data_; }

  /// Throws UnknownSetError for unresolved set names.
  std::shared_ptr<const FacilityIndex> index_for(const Scenario& scenario) const;
  std::size_t cached_indexes() const;

  AnalysisResult analyze(const AnalysisRequest& request) const;
  ScenarioDelta compare(const CompareRequest& request) const;
  DecileHistogram svi_hist(const SviHistRequest& request) const;

  Json analyze_json(const AnalysisRequest& request) const;
  Json compare_json(const CompareRequest& request) const;
  Json svi_hist_json(const SviHistRequest& request) const;
  Json sets_json() const;
  Json meta_json() const;

 private:
  void require_sets(const std::vector<std::string>& names) const;
  DistanceTable distances(const Scenario& scenario) const;

  Dataset data_;
  AnalysisOptions options_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::shared_future<std::shared_ptr<const FacilityIndex>>> cache_;
};

}  // namespace proxima
