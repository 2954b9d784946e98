#pragma once

#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "conflictlens/error.hpp"
#include "conflictlens/service/service.hpp"

namespace conflictlens::service {

// HTTP status for a typed error: 404 unknown session, 409 state conflicts,
// 422 validation, 502 inference failures, 500 otherwise.
int http_status(ErrorCode code) noexcept;

// {type, title, status, code, detail}
nlohmann::json problem_details(ErrorCode code, const std::string& detail);

class ApiServer {
 public:
  explicit ApiServer(ConflictLensService& service);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds without serving yet; port 0 picks an ephemeral port. Returns the
  // bound port. Throws ConfigError.
  int bind(const std::string& host, int port);
  // Serves until stop(). Blocking.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace conflictlens::service
