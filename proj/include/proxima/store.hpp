#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "proxima/coverage.hpp"
#include "proxima/ingest.hpp"

namespace proxima {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loaded, validated data shared by the CLI and the service.
struct Dataset {
  std::vector<Tract> tracts;
  SetCatalog sets;
  std::vector<std::string> set_order;  // manifest order
  std::set<std::string> non_continental = StateUniverse::default_non_continental();
};

struct IngestInputs {
  std::filesystem::path tracts;
  std::optional<std::filesystem::path> svi;
  std::vector<std::pair<std::string, std::filesystem::path>> facilities;  // set name, file
  std::vector<std::pair<std::string, std::filesystem::path>> state_sites;  // state, file
  std::map<std::string, std::vector<std::string>> chain_filters;           // set name -> chains
  StateUniverse universe = StateUniverse::united_states();
  char delimiter = ',';
};

struct IngestSummary {
  IngestReport tracts;
  std::optional<IngestReport> svi;
  std::vector<std::pair<std::string, IngestReport>> sets;
};

/// Name under which merged state-site files are stored.
inline constexpr std::string_view kStateSetName = "state";

std::string sha256_hex(std::string_view bytes);

/// Set names are used as file names: [A-Za-z0-9_-]+.
bool valid_set_name(std::string_view name);

/// Parses and validates every input, then writes normalized CSV files and
/// manifest.json into `out_dir`. Throws FormatError/StoreError on fatal
/// problems, naming the offending path.
IngestSummary ingest_to_store(const IngestInputs& inputs, const std::filesystem::path& out_dir);

/// Reads a store, verifying every file against its manifest hash.
Dataset load_store(const std::filesystem::path& dir);

nlohmann::ordered_json report_json(const IngestReport& report);

}  // namespace proxima
