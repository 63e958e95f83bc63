#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "proxima/model.hpp"

namespace testing {

inline std::filesystem::path fixture_dir() { return PROXIMA_FIXTURE_DIR; }
inline std::filesystem::path mini(const std::string& name) { return fixture_dir() / "mini" / name; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "proxima-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Counts where every group weight is derived from `w` and the sum
/// identities hold.
inline proxima::CountFields counts_from(proxima::Count w) {
  proxima::CountFields f;
  f.adults_total = w;
  f.households_total = w;
  f.households_low_income = w / 2;
  f.households_high_income = w / 4;
  f.pop_total = w;
  f.pop_white = w / 2;
  f.pop_black = w / 4;
  f.pop_aapi = w / 8;
  f.pop_other = w - w / 2 - w / 4 - w / 8;
  f.pop_hispanic = w / 3;
  f.pop_non_hispanic = w - w / 3;
  return f;
}

inline proxima::Tract make_tract(std::string id, const std::string& state, double lat, double lon,
                                 proxima::Count weight = 100) {
  return proxima::Tract{std::move(id), proxima::StateCode(state), proxima::Coordinate(lat, lon),
                        proxima::DemographicCounts(counts_from(weight)), std::nullopt};
}

inline proxima::Facility make_facility(std::string id, const std::string& state, double lat,
                                       double lon) {
  return proxima::Facility{std::move(id), "chain", proxima::StateCode(state),
                           proxima::Coordinate(lat, lon)};
}

/// Uniform point on the sphere.
inline proxima::Coordinate random_coordinate(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  return {std::asin(u(rng)) * 180.0 / std::numbers::pi, lon(rng)};
}

/// Point in a small box, for dense regional instances.
inline proxima::Coordinate random_in_box(std::mt19937_64& rng, double lat0, double lon0,
                                         double span) {
  std::uniform_real_distribution<double> u(0.0, span);
  return {lat0 + u(rng), lon0 + u(rng)};
}

inline std::vector<std::string> state_names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(std::string{static_cast<char>('A' + i / 26), static_cast<char>('A' + i % 26)});
  }
  return out;
}

/// Tracts and facilities spread over `states` boxes of the continental US
/// scale; each state owns one box, so partitions are spatially coherent.
struct Instance {
  std::vector<proxima::Tract> tracts;
  std::vector<proxima::Facility> facilities;
};

inline Instance random_instance(std::mt19937_64& rng, int tracts, int facilities, int states,
                                double span = 3.0) {
  const auto names = state_names(states);
  std::uniform_int_distribution<int> pick(0, states - 1);
  std::uniform_int_distribution<proxima::Count> weight(0, 5000);
  auto origin = [&](int s) { return std::pair(30.0 + 2.0 * (s % 5), -120.0 + 4.0 * s); };
  Instance inst;
  for (int i = 0; i < tracts; ++i) {
    const int s = pick(rng);
    auto [lat0, lon0] = origin(s);
    const auto c = random_in_box(rng, lat0, lon0, span);
    inst.tracts.push_back(proxima::Tract{"T" + std::to_string(i), proxima::StateCode(names[s]), c,
                                         proxima::DemographicCounts(counts_from(weight(rng))),
                                         std::nullopt});
  }
  for (int i = 0; i < facilities; ++i) {
    const int s = pick(rng);
    auto [lat0, lon0] = origin(s);
    const auto c = random_in_box(rng, lat0, lon0, span);
    inst.facilities.push_back(proxima::Facility{"F" + std::to_string(i), "chain",
                                                proxima::StateCode(names[s]), c});
  }
  return inst;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (auto n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace testing
