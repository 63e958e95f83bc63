#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "proxima/engine.hpp"

namespace proxima {

/// JSON-over-HTTP facade over an Engine.
///
///   GET  /sets      -> [{name, count}] in manifest order
///   GET  /meta      -> regions, groups, states
///   POST /analyze   -> Engine::analyze_json
///   POST /compare   -> Engine::compare_json
///   POST /svi-hist  -> Engine::svi_hist_json
///
/// Every endpoint answers 503 until an engine is installed. Bodies are
/// rendered exactly as the CLI writes its JSON files.
class Service {
 public:
  Service();
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void set_engine(std::shared_ptr<const Engine> engine);
  /// Reported in 503 bodies once a background load has failed.
  void set_load_error(std::string message);
  bool ready() const;

  /// Binds without serving. Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();
  /// Blocks until run() is accepting connections.
  void wait_until_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads `store` on a background thread and installs the engine when done.
std::jthread load_in_background(Service& service, std::filesystem::path store,
                                unsigned threads = 0);

}  // namespace proxima
