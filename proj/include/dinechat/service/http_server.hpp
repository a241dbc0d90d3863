#pragma once

#include <memory>
#include <string>

#include "dinechat/service/app.hpp"

namespace httplib {
class Server;
}

namespace dinechat::service {

// JSON-over-HTTP front end for ExplanationService.
//   GET  /healthz
//   POST /v1/sessions                  GET /v1/sessions/{id}
//   POST /v1/sessions/{id}/ask
//   GET  /v1/traces                    GET /v1/traces/{id}/dines?from=&to=
//   POST /v1/experiments               GET /v1/experiments/{id}/report
class HttpServer {
 public:
  explicit HttpServer(ExplanationService& service);
  ~HttpServer();

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void listen();
  void stop();
  bool running() const;

 private:
  ExplanationService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace dinechat::service
