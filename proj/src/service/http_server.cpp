#include <httplib.h>

#include "dinechat/service/http_server.hpp"

#include "dinechat/error.hpp"

namespace dinechat::service {
namespace {

void send(httplib::Response& res, const HttpResult& result) {
  res.status = result.status;
  for (const auto& [k, v] : result.headers) res.set_header(k, v);
  res.set_content(result.body, "application/json");
}

std::optional<std::string> query(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

HttpServer::HttpServer(ExplanationService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                         {"Access-Control-Expose-Headers", "Retry-After"}});
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.health());
  });
  s.Post("/v1/sessions", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.create_session());
  });
  s.Get(R"(/v1/sessions/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.get_session(req.matches[1]));
  });
  s.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/ask)",
         [this](const httplib::Request& req, httplib::Response& res) {
           send(res, service_.ask(req.matches[1], req.body));
         });
  s.Get("/v1/traces", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.list_traces());
  });
  s.Get(R"(/v1/traces/([A-Za-z0-9_.-]+)/dines)",
        [this](const httplib::Request& req, httplib::Response& res) {
          send(res, service_.trace_dines(req.matches[1], query(req, "from"), query(req, "to")));
        });
  s.Post("/v1/experiments", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.start_experiment(req.body));
  });
  s.Get(R"(/v1/experiments/([A-Za-z0-9_-]+)/report)",
        [this](const httplib::Request& req, httplib::Response& res) {
          send(res, service_.experiment_report(req.matches[1]));
        });
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(R"({"error":"no such endpoint"})", "application/json");
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

bool HttpServer::running() const { return server_->is_running(); }

}  // namespace dinechat::service
