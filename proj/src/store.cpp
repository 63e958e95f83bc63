#include "proxima/store.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <ranges>
#include <memory>
#include <sstream>

namespace proxima {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

bool valid_set_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

Json report_json(const IngestReport& report) {
  Json j;
  j["records_read"] = report.records_read;
  j["records_accepted"] = report.records_accepted;
  Json rejected = Json::object();
  for (const auto& [reason, n] : report.rejected) rejected[reason] = n;
  j["rejected"] = rejected;
  j["svi_matched"] = report.svi_matched;
  j["geocode_doubt"] = report.geocode_doubt;
  j["warnings"] = report.warnings;
  return j;
}

namespace {

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StoreError("cannot open input file: " + p.string());
  return in;
}

std::string read_file(const fs::path& p) {
  auto in = open_input(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError("cannot write file: " + p.string());
  out << content;
  if (!out) throw StoreError("write failed: " + p.string());
}

template <class Fn>
auto with_path(const fs::path& p, Fn fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

Json file_entry(const fs::path& dir, const std::string& rel, const std::string& content) {
  write_file(dir / rel, content);
  Json j;
  j["file"] = rel;
  j["sha256"] = sha256_hex(content);
  return j;
}

}  // namespace

IngestSummary ingest_to_store(const IngestInputs& inputs, const fs::path& out_dir) {
  IngestSummary summary;

  auto tract_in = open_input(inputs.tracts);
  TractFormat tf{inputs.delimiter, inputs.universe};
  auto tracts = with_path(inputs.tracts, [&] { return parse_tracts(tract_in, tf); });
  summary.tracts = tracts.report;
  std::vector<Tract> joined = std::move(tracts.tracts);
  if (inputs.svi) {
    auto svi_in = open_input(*inputs.svi);
    auto svi = with_path(*inputs.svi,
                         [&] { return join_svi(std::move(joined), svi_in, inputs.delimiter); });
    joined = std::move(svi.tracts);
    summary.svi = svi.report;
  }

  std::vector<FacilitySet> sets;
  std::set<std::string> names;
  for (const auto& [name, path] : inputs.facilities) {
    if (!valid_set_name(name) || name == kStateSetName) {
      throw StoreError("invalid facility set name '" + name + "'");
    }
    if (!names.insert(name).second) throw StoreError("facility set '" + name + "' given twice");
    FacilityFormat ff{inputs.delimiter, inputs.universe, {}};
    if (auto it = inputs.chain_filters.find(name); it != inputs.chain_filters.end()) {
      ff.chain_filter = it->second;
    }
    auto in = open_input(path);
    auto parsed = with_path(path, [&] { return parse_facilities(in, name, std::nullopt, ff); });
    summary.sets.emplace_back(name, parsed.report);
    sets.push_back(std::move(parsed.set));
  }
  for (const auto& name : inputs.chain_filters | std::views::keys) {
    if (!names.contains(name)) throw StoreError("chain filter for unknown set '" + name + "'");
  }

  if (!inputs.state_sites.empty()) {
    std::vector<Facility> merged;
    IngestReport combined;
    for (const auto& [state, path] : inputs.state_sites) {
      const StateCode code(state);
      auto in = open_input(path);
      FacilityFormat ff{inputs.delimiter, inputs.universe, {}};
      auto parsed = with_path(path, [&] { return parse_state_sites(in, code, ff); });
      combined.records_read += parsed.report.records_read;
      combined.records_accepted += parsed.report.records_accepted;
      combined.geocode_doubt += parsed.report.geocode_doubt;
      for (const auto& [reason, n] : parsed.report.rejected) combined.rejected[reason] += n;
      for (const auto& f : parsed.set.facilities()) {
        Facility q = f;
        q.id = state + ":" + f.id;
        merged.push_back(std::move(q));
      }
    }
    FacilitySet state_set(std::string(kStateSetName), std::move(merged));
    const auto before = state_set.size();
    state_set = dedupe_coordinates(state_set);
    if (before != state_set.size()) {
      combined.warnings.push_back(std::to_string(before - state_set.size()) +
                                  " state sites shared coordinates and were merged");
    }
    summary.sets.emplace_back(std::string(kStateSetName), combined);
    sets.push_back(std::move(state_set));
  }

  fs::create_directories(out_dir / "sets");
  Json manifest;
  manifest["format"] = "proxima-store/1";
  Json universe;
  universe["open"] = inputs.universe.is_open();
  universe["non_continental"] = inputs.universe.non_continental();
  manifest["universe"] = universe;

  std::ostringstream tract_csv;
  write_tracts(tract_csv, joined);
  auto tract_entry = file_entry(out_dir, "tracts.csv", tract_csv.str());
  tract_entry["count"] = joined.size();
  manifest["tracts"] = tract_entry;

  std::ostringstream svi_csv;
  write_svi(svi_csv, joined);
  auto svi_entry = file_entry(out_dir, "svi.csv", svi_csv.str());
  svi_entry["matched"] = summary.svi ? summary.svi->svi_matched : 0;
  manifest["svi"] = svi_entry;

  Json set_entries = Json::array();
  for (const auto& set : sets) {
    std::ostringstream csv_text;
    write_facilities(csv_text, set);
    auto entry = file_entry(out_dir, "sets/" + set.name() + ".csv", csv_text.str());
    Json named;
    named["name"] = set.name();
    named["count"] = set.size();
    named.update(entry);
    set_entries.push_back(std::move(named));
  }
  manifest["sets"] = set_entries;

  Json reports;
  reports["tracts"] = report_json(summary.tracts);
  if (summary.svi) reports["svi"] = report_json(*summary.svi);
  Json set_reports = Json::object();
  for (const auto& [name, r] : summary.sets) set_reports[name] = report_json(r);
  reports["sets"] = set_reports;
  manifest["reports"] = reports;

  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

namespace {

std::string verified(const fs::path& dir, const Json& entry) {
  const auto rel = entry.at("file").get<std::string>();
  const auto content = read_file(dir / rel);
  if (sha256_hex(content) != entry.at("sha256").get<std::string>()) {
    throw StoreError("hash mismatch for " + (dir / rel).string());
  }
  return content;
}

}  // namespace

Dataset load_store(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw StoreError("no manifest.json in " + dir.string());
  Json manifest;
  try {
    manifest = Json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw StoreError("unreadable manifest " + manifest_path.string() + ": " + e.what());
  }

  try {
    if (manifest.at("format") != "proxima-store/1") {
      throw StoreError("unsupported store format in " + manifest_path.string());
    }
    Dataset data;
    data.non_continental =
        manifest.at("universe").at("non_continental").get<std::set<std::string>>();
    // Store content was validated at ingest time; reload under an open universe.
    const StateUniverse open = StateUniverse::open();

    std::istringstream tract_in(verified(dir, manifest.at("tracts")));
    auto tracts = parse_tracts(tract_in, TractFormat{',', open});
    if (tracts.report.records_accepted != tracts.report.records_read) {
      throw StoreError("store tracts.csv contains invalid rows");
    }
    std::istringstream svi_in(verified(dir, manifest.at("svi")));
    auto joined = join_svi(std::move(tracts.tracts), svi_in);
    data.tracts = std::move(joined.tracts);

    for (const auto& entry : manifest.at("sets")) {
      const auto name = entry.at("name").get<std::string>();
      std::istringstream in(verified(dir, entry));
      auto parsed = parse_facilities(in, name, std::nullopt, FacilityFormat{',', open, {}});
      if (parsed.set.size() != entry.at("count").get<std::size_t>()) {
        throw StoreError("set '" + name + "' count differs from manifest");
      }
      data.set_order.push_back(name);
      data.sets.emplace(name, std::move(parsed.set));
    }
    return data;
  } catch (const nlohmann::json::exception& e) {
    throw StoreError("malformed manifest " + manifest_path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw StoreError("malformed store file in " + dir.string() + ": " + e.what());
  }
}

}  // namespace proxima
