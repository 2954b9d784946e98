#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "conflictlens/service/http_api.hpp"

#include <httplib.h>

#include <functional>

namespace conflictlens::service {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SessionNotFound:
      return 404;
    case ErrorCode::IllegalTransition:
    case ErrorCode::StageClosed:
    case ErrorCode::BranchEnded:
    case ErrorCode::InvalidStylePair:
      return 409;
    case ErrorCode::InvalidItemCount:
    case ErrorCode::ItemOutOfRange:
    case ErrorCode::IndexOutOfBounds:
    case ErrorCode::EmptyTranscript:
    case ErrorCode::UnsupportedImage:
    case ErrorCode::InvalidResetPoint:
    case ErrorCode::TurnOutOfRange:
    case ErrorCode::IncompleteAnnotation:
    case ErrorCode::InvalidInput:
      return 422;
    case ErrorCode::ExtractionFailed:
    case ErrorCode::EstimationFailed:
    case ErrorCode::GenerationFailed:
    case ErrorCode::SimulationFailed:
    case ErrorCode::RewriteUnavailable:
    case ErrorCode::SchemaValidationFailed:
    case ErrorCode::TransportFailed:
    case ErrorCode::Timeout:
      return 502;
    case ErrorCode::UnknownTemplate:
    case ErrorCode::MissingBinding:
    case ErrorCode::ConfigError:
    case ErrorCode::StorageError:
      return 500;
  }
  return 500;
}

namespace {

std::string status_title(int status) {
  switch (status) {
    case 404: return "Not Found";
    case 409: return "Conflict";
    case 422: return "Unprocessable Entity";
    case 502: return "Bad Gateway";
    default: return "Internal Server Error";
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_problem(httplib::Response& res, ErrorCode code, const std::string& detail) {
  const auto body = problem_details(code, detail);
  res.status = body.at("status").get<int>();
  res.set_content(body.dump(), "application/problem+json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("request body is not JSON: ") + e.what());
  }
}

using Handler = std::function<json(const httplib::Request&)>;

httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
  return [h = std::move(h), ok_status](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, ok_status, h(req));
    } catch (const Error& e) {
      send_problem(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_problem(res, ErrorCode::InvalidInput, e.what());
    } catch (const std::exception& e) {
      send_problem(res, ErrorCode::StorageError, e.what());
    }
  };
}

}  // namespace

json problem_details(ErrorCode code, const std::string& detail) {
  const int status = http_status(code);
  return {{"type", "about:blank"},
          {"title", status_title(status)},
          {"status", status},
          {"code", to_string(code)},
          {"detail", detail}};
}

struct ApiServer::Impl {
  ConflictLensService& svc;
  httplib::Server server;

  explicit Impl(ConflictLensService& s) : svc(s) { routes(); }

  void routes() {
    const std::string sid = "/api/sessions/([A-Za-z0-9_-]{1,64})";
    auto& s = svc;

    server.set_payload_max_length(128u * 1024 * 1024);

    server.Post("/api/sessions", wrap([&s](const auto&) { return s.create_session(); }, 201));
    server.Get(sid, wrap([&s](const auto& req) { return s.get_session(req.matches[1]); }));
    server.Post(sid + "/screenshots", wrap([&s](const httplib::Request& req) {
      if (!req.is_multipart_form_data()) throw Error(ErrorCode::InvalidInput, "expected multipart/form-data");
      std::vector<ImageBlob> images;
      for (const auto& [field, file] : req.files) images.push_back({file.content, file.filename});
      return s.upload_screenshots(req.matches[1], images);
    }));
    server.Post(sid + "/estimates", wrap([&s](const auto& req) { return s.estimate(req.matches[1]); }));
    server.Put(sid + "/questionnaire/([a-z]+)", wrap([&s](const auto& req) {
      return s.adjust_questionnaire(req.matches[1], req.matches[2], parse_body(req));
    }));
    server.Post(sid + "/finalize-styles", wrap([&s](const auto& req) { return s.finalize_styles(req.matches[1]); }));
    server.Post(sid + "/dialogue",
                wrap([&s](const auto& req) { return s.generate_dialogue(req.matches[1], parse_body(req)); }));
    server.Post(sid + "/annotations",
                wrap([&s](const auto& req) { return s.annotate(req.matches[1], parse_body(req)); }));
    server.Get(sid + "/annotation-summary",
               wrap([&s](const auto& req) { return s.annotation_summary(req.matches[1]); }));
    server.Get(sid + "/reset-points", wrap([&s](const auto& req) { return s.reset_points(req.matches[1]); }));
    server.Post(sid + "/practice/reset",
                wrap([&s](const auto& req) { return s.practice_reset(req.matches[1], parse_body(req)); }));
    server.Post(sid + "/practice/turns",
                wrap([&s](const auto& req) { return s.practice_turn(req.matches[1], parse_body(req)); }));
    server.Post(sid + "/close", wrap([&s](const auto& req) { return s.close(req.matches[1]); }));
    server.Get("/api/catalogs/(questionnaire|behaviors|topics|lint-lexicons)",
               wrap([&s](const auto& req) { return s.catalog(req.matches[1]); }));
    server.Get("/api/health", wrap([](const auto&) { return json{{"status", "ok"}}; }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        res.set_content(json{{"type", "about:blank"},
                             {"title", "Not Found"},
                             {"status", 404},
                             {"code", "not_found"},
                             {"detail", "no such route"}}
                            .dump(),
                        "application/problem+json");
      }
    });
  }
};

ApiServer::ApiServer(ConflictLensService& service) : impl_(std::make_unique<Impl>(service)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::ConfigError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::ConfigError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace conflictlens::service
