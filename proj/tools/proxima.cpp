// proxima: ingest facility/tract data into a store, run coverage analyses,
// compare scenarios, profile facilities by SVI decile, or serve the same
// analyses over HTTP.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "proxima/engine.hpp"
#include "proxima/report.hpp"
#include "proxima/service.hpp"
#include "proxima/store.hpp"

namespace fs = std::filesystem;
using proxima::Json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string piece;
  for (char c : s) {
    if (c == sep) {
      out.push_back(piece);
      piece.clear();
    } else {
      piece.push_back(c);
    }
  }
  out.push_back(piece);
  return out;
}

std::pair<std::string, std::string> key_value(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
    throw CLI::ValidationError(flag, "expected KEY=VALUE, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::string env_or(const char* name, std::string fallback) {
  if (const char* v = std::getenv(name); v && *v) return v;
  return fallback;
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw proxima::StoreError("cannot write " + p.string());
  out << content;
  if (!out) throw proxima::StoreError("write failed: " + p.string());
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

/// Flags shared by analyze and compare; only flags actually given end up in
/// the request body, so scenario-file values are overridden selectively.
struct ScenarioFlags {
  std::string scenario_file;
  std::string scenario;
  std::string region;
  std::string thresholds;
  std::string groups;
  std::vector<std::string> cross_state;
  bool no_per_state = false;
  int decimals = -1;
  double goal_miles = -1;
  double goal_target = -1;
  std::string goal_group;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--scenario-file", scenario_file, "JSON file with named scenarios");
    cmd->add_option("--scenario", scenario, "scenario name (from --scenario-file) or label");
    cmd->add_option("--region", region, "all | conus | comma-separated states");
    cmd->add_option("--thresholds", thresholds, "comma-separated miles, e.g. 1,2,5");
    cmd->add_option("--groups", groups, "comma-separated demographic groups");
    cmd->add_option("--cross-state", cross_state, "ST=A+B: tracts in ST may use A and B sites");
    cmd->add_flag("--no-per-state", no_per_state, "omit per-state rows");
    cmd->add_option("--decimals", decimals, "report rounding (default 2)");
    cmd->add_option("--goal-miles", goal_miles, "goal-check distance (default 5)");
    cmd->add_option("--goal-target", goal_target, "goal-check percent (default 90)");
    cmd->add_option("--goal-group", goal_group, "goal-check group (default all_adults)");
  }

  Json body() const {
    Json j = Json::object();
    if (!scenario_file.empty()) {
      std::ifstream in(scenario_file);
      if (!in) throw proxima::StoreError("cannot open scenario file " + scenario_file);
      const auto doc = Json::parse(in);
      bool found = false;
      for (const auto& s : doc.at("scenarios")) {
        if (s.value("name", "") == scenario) {
          j = s;
          found = true;
        }
      }
      if (!found) {
        throw proxima::RequestError(std::vector<proxima::FieldError>{{"scenario", "no scenario named '" + scenario + "' in " +
                                                      scenario_file}});
      }
    } else if (!scenario.empty()) {
      j["name"] = scenario;
    }
    if (!region.empty()) {
      if (region == "all" || region == "conus") j["region"] = region;
      else j["region"] = split(region, ',');
    }
    if (!thresholds.empty()) {
      Json t = Json::array();
      for (const auto& v : split(thresholds, ',')) {
        try {
          std::size_t used = 0;
          const double d = std::stod(v, &used);
          if (used != v.size()) throw std::invalid_argument(v);
          t.push_back(d);
        } catch (const std::exception&) {
          throw proxima::RequestError(std::vector<proxima::FieldError>{{"thresholds", "not a number: '" + v + "'"}});
        }
      }
      j["thresholds"] = t;
    }
    if (!groups.empty()) j["groups"] = split(groups, ',');
    if (!cross_state.empty()) {
      Json c = j.value("cross_state", Json::object());
      for (const auto& entry : cross_state) {
        auto [state, extra] = key_value(entry, "--cross-state");
        c[state] = split(extra, '+');
      }
      j["cross_state"] = c;
    }
    if (no_per_state) j["per_state"] = false;
    if (decimals >= 0) j["decimals"] = decimals;
    Json goal = j.value("goal", Json::object());
    if (goal_miles >= 0) goal["miles"] = goal_miles;
    if (goal_target >= 0) goal["target"] = goal_target;
    if (!goal_group.empty()) goal["group"] = goal_group;
    if (!goal.empty()) j["goal"] = goal;
    return j;
  }
};

proxima::Engine open_engine(const std::string& store, unsigned threads) {
  if (store.empty()) throw proxima::StoreError("no store given (--store or PROXIMA_STORE)");
  return proxima::Engine(proxima::load_store(store), threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Facility access coverage analysis"};
  app.require_subcommand(1);
  const std::string default_store = env_or("PROXIMA_STORE", "");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate inputs and write a dataset store");
  std::string tracts_path, svi_path, out_store = default_store;
  std::vector<std::string> facility_args, state_args, chain_args;
  bool open_states = false;
  char delimiter = ',';
  ingest->add_option("--tracts", tracts_path, "tract file")->required();
  ingest->add_option("--svi", svi_path, "SVI file (tract_id, rpl_themes)");
  ingest->add_option("--facilities", facility_args, "SET=PATH facility file");
  ingest->add_option("--chains", chain_args, "SET=CHAIN+CHAIN keep only these chains");
  ingest->add_option("--state-sites", state_args, "ST=PATH state-listed sites");
  ingest->add_option("--out", out_store, "store directory");
  ingest->add_option("--delimiter", delimiter, "input field delimiter");
  ingest->add_flag("--open-states", open_states, "accept any two-letter state code");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "coverage shares for one scenario");
  std::string store = default_store, sets, out_dir;
  unsigned threads = 0;
  ScenarioFlags analyze_flags;
  analyze->add_option("--store", store, "store directory (default $PROXIMA_STORE)");
  analyze->add_option("--sets", sets, "comma-separated facility sets");
  analyze->add_option("--threads", threads, "worker threads (0 = all cores)");
  analyze->add_option("--out", out_dir, "output directory")->required();
  analyze_flags.add_to(analyze);

  // compare
  auto* compare = app.add_subcommand("compare", "share deltas between two scenarios");
  std::string base_sets, aug_sets;
  ScenarioFlags compare_flags;
  compare->add_option("--store", store, "store directory (default $PROXIMA_STORE)");
  compare->add_option("--base", base_sets, "comma-separated base sets")->required();
  compare->add_option("--augmented", aug_sets, "comma-separated augmented sets")->required();
  compare->add_option("--threads", threads, "worker threads (0 = all cores)");
  compare->add_option("--out", out_dir, "output directory")->required();
  compare_flags.add_to(compare);

  // svi-hist
  auto* svi_hist = app.add_subcommand("svi-hist", "facility shares by SVI decile");
  int hist_decimals = 2;
  svi_hist->add_option("--store", store, "store directory (default $PROXIMA_STORE)");
  svi_hist->add_option("--sets", sets, "comma-separated facility sets")->required();
  svi_hist->add_option("--decimals", hist_decimals, "report rounding");
  svi_hist->add_option("--out", out_dir, "output directory")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "serve analyses over HTTP");
  std::string host = "127.0.0.1";
  int port = std::stoi(env_or("PROXIMA_PORT", "8080"));
  serve->add_option("--store", store, "store directory (default $PROXIMA_STORE)");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port (default $PROXIMA_PORT or 8080)");
  serve->add_option("--threads", threads, "worker threads per analysis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      if (out_store.empty()) throw proxima::StoreError("no output store (--out or PROXIMA_STORE)");
      proxima::IngestInputs in;
      in.tracts = tracts_path;
      if (!svi_path.empty()) in.svi = svi_path;
      for (const auto& a : facility_args) in.facilities.push_back(key_value(a, "--facilities"));
      for (const auto& a : state_args) in.state_sites.push_back(key_value(a, "--state-sites"));
      for (const auto& a : chain_args) {
        auto [set, chains] = key_value(a, "--chains");
        in.chain_filters[set] = split(chains, '+');
      }
      if (open_states) in.universe = proxima::StateUniverse::open();
      in.delimiter = delimiter;
      const auto summary = proxima::ingest_to_store(in, out_store);

      Json report;
      report["store"] = out_store;
      report["tracts"] = proxima::report_json(summary.tracts);
      if (summary.svi) report["svi"] = proxima::report_json(*summary.svi);
      Json set_reports = Json::object();
      for (const auto& [name, r] : summary.sets) {
        set_reports[name] = proxima::report_json(r);
        for (const auto& w : r.warnings) std::cerr << "warning: " << name << ": " << w << "\n";
      }
      report["sets"] = set_reports;
      std::cout << pretty(report);
      return 0;
    }

    if (analyze->parsed()) {
      Json body = analyze_flags.body();
      if (!sets.empty()) body["sets"] = split(sets, ',');
      const auto request = proxima::parse_analysis_request(body);
      const auto engine = open_engine(store, threads);
      const auto result = engine.analyze(request);
      const int d = request.decimals;
      using proxima::report::Format;

      fs::create_directories(out_dir);
      const fs::path out(out_dir);
      write_text(out / "analysis.json", pretty(engine.analyze_json(request)));
      write_text(out / "coverage.csv", proxima::report::render_coverage(result.coverage, Format::csv, d));
      write_text(out / "coverage.json", proxima::report::render_coverage(result.coverage, Format::json, d));
      write_text(out / "per_capita.csv", proxima::report::render_per_capita(result.per_capita, Format::csv, d));
      write_text(out / "distances.csv", proxima::report::render_distances(result.distances, Format::csv));
      const auto goal_line = proxima::report::render_goal_line(result.goal, d);
      write_text(out / "goal.txt", goal_line);
      std::cout << goal_line;
      return 0;
    }

    if (compare->parsed()) {
      Json body = compare_flags.body();
      body.erase("sets");
      body["base"] = split(base_sets, ',');
      body["augmented"] = split(aug_sets, ',');
      const auto request = proxima::parse_compare_request(body);
      const auto engine = open_engine(store, threads);
      const auto delta = engine.compare(request);
      const int d = request.base.decimals;
      using proxima::report::Format;

      fs::create_directories(out_dir);
      const fs::path out(out_dir);
      write_text(out / "compare.json", pretty(engine.compare_json(request)));
      write_text(out / "delta.csv", proxima::report::render_delta(delta, Format::csv, d));
      write_text(out / "tract_deltas.csv", proxima::report::render_tract_deltas(delta));
      std::cout << proxima::report::render_delta(delta, Format::csv, d);
      return 0;
    }

    if (svi_hist->parsed()) {
      Json body;
      body["sets"] = split(sets, ',');
      body["decimals"] = hist_decimals;
      const auto request = proxima::parse_svi_hist_request(body);
      const auto engine = open_engine(store, 1);
      const auto h = engine.svi_hist(request);
      using proxima::report::Format;

      fs::create_directories(out_dir);
      const fs::path out(out_dir);
      write_text(out / "svi_hist.json", pretty(engine.svi_hist_json(request)));
      const auto csv_text = proxima::report::render_decile(h, Format::csv, request.decimals);
      write_text(out / "svi_hist.csv", csv_text);
      std::cout << csv_text;
      return 0;
    }

    if (serve->parsed()) {
      if (store.empty()) throw proxima::StoreError("no store given (--store or PROXIMA_STORE)");
      proxima::Service service;
      const int bound = service.bind(host, port);
      auto loader = proxima::load_in_background(service, store, threads);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      service.run();
      return 0;
    }
  } catch (const proxima::UnknownSetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const proxima::RequestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
