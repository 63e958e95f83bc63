#include "proxima/service.hpp"

#include <mutex>

#include "httplib.h"

namespace proxima {

struct Service::Impl {
  httplib::Server server;
  mutable std::mutex mutex;
  std::shared_ptr<const Engine> engine;
  std::string load_error;

  std::shared_ptr<const Engine> current() const {
    std::lock_guard lock(mutex);
    return engine;
  }
};

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

Json error_body(const std::string& message) {
  Json j;
  j["error"] = message;
  return j;
}

}  // namespace

Service::Service() : impl_(std::make_unique<Impl>()) {
  auto guarded = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      auto engine = impl_->current();
      if (!engine) {
        std::string why;
        {
          std::lock_guard lock(impl_->mutex);
          why = impl_->load_error;
        }
        send_json(res, 503, error_body(why.empty() ? "store is loading" : why));
        return;
      }
      try {
        handler(*engine, req, res);
      } catch (const RequestError& e) {
        send_json(res, 400, e.to_json());
      } catch (const UnknownSetError& e) {
        Json body = error_body("unknown set");
        body["name"] = e.name();
        send_json(res, 404, body);
      } catch (const InvariantError& e) {
        send_json(res, 400, RequestError(std::vector<FieldError>{{e.reason(), e.what()}}).to_json());
      } catch (const std::exception& e) {
        send_json(res, 500, error_body(e.what()));
      }
    };
  };

  auto parse_body = [](const httplib::Request& req) {
    try {
      return Json::parse(req.body);
    } catch (const nlohmann::json::parse_error&) {
      throw RequestError(std::vector<FieldError>{{"body", "malformed JSON"}});
    }
  };

  auto& s = impl_->server;
  s.Get("/sets", guarded([](const Engine& e, const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, e.sets_json());
        }));
  s.Get("/meta", guarded([](const Engine& e, const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, e.meta_json());
        }));
  s.Post("/analyze",
         guarded([parse_body](const Engine& e, const httplib::Request& req,
                              httplib::Response& res) {
           send_json(res, 200, e.analyze_json(parse_analysis_request(parse_body(req))));
         }));
  s.Post("/compare",
         guarded([parse_body](const Engine& e, const httplib::Request& req,
                              httplib::Response& res) {
           send_json(res, 200, e.compare_json(parse_compare_request(parse_body(req))));
         }));
  s.Post("/svi-hist",
         guarded([parse_body](const Engine& e, const httplib::Request& req,
                              httplib::Response& res) {
           send_json(res, 200, e.svi_hist_json(parse_svi_hist_request(parse_body(req))));
         }));
}

Service::~Service() { stop(); }

void Service::set_engine(std::shared_ptr<const Engine> engine) {
  std::lock_guard lock(impl_->mutex);
  impl_->engine = std::move(engine);
}

void Service::set_load_error(std::string message) {
  std::lock_guard lock(impl_->mutex);
  impl_->load_error = std::move(message);
}

bool Service::ready() const { return impl_->current() != nullptr; }

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_until_running() const { impl_->server.wait_until_ready(); }

std::jthread load_in_background(Service& service, std::filesystem::path store, unsigned threads) {
  return std::jthread([&service, store = std::move(store), threads] {
    try {
      service.set_engine(std::make_shared<const Engine>(load_store(store), threads));
    } catch (const std::exception& e) {
      service.set_load_error(std::string("store failed to load: ") + e.what());
    }
  });
}

}  // namespace proxima
