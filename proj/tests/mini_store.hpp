#pragma once

#include "proxima/engine.hpp"
#include "proxima/store.hpp"
#include "support.hpp"

namespace testing {

inline proxima::IngestInputs mini_inputs() {
  proxima::IngestInputs in;
  in.tracts = mini("tracts.csv");
  in.svi = mini("svi.csv");
  in.facilities = {{"pharm", mini("pharm.csv")}, {"dg", mini("dg.csv")}};
  return in;
}

/// Ingests the MINI fixture into `dir` and loads it back.
inline proxima::Dataset mini_dataset(const std::filesystem::path& dir) {
  proxima::ingest_to_store(mini_inputs(), dir);
  return proxima::load_store(dir);
}

/// The scenarios of the MINI fixture, keyed by name.
inline std::map<std::string, proxima::Json> mini_scenarios() {
  auto doc = proxima::Json::parse(read_file(mini("scenarios.json")));
  std::map<std::string, proxima::Json> out;
  for (const auto& s : doc["scenarios"]) out[s["name"].get<std::string>()] = s;
  return out;
}

}  // namespace testing
