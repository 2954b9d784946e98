#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "conflictlens/error.hpp"
#include "conflictlens/gateway/provider.hpp"

namespace conflictlens::gateway {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ConfigError, "provider base_url must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw Error(ErrorCode::ConfigError, "provider base_url is not set");
  if (config_.model_name.empty()) throw Error(ErrorCode::ConfigError, "provider model_name is not set");
  split_url(config_.base_url);
}

std::string HttpProvider::complete(const ProviderRequest& request) {
  const auto url = split_url(config_.base_url);

  nlohmann::json user_content;
  if (request.images.empty()) {
    user_content = request.user_text;
  } else {
    user_content = nlohmann::json::array();
    user_content.push_back({{"type", "text"}, {"text", request.user_text}});
    for (const auto& img : request.images) {
      user_content.push_back(
          {{"type", "image_url"},
           {"image_url", {{"url", "data:" + img.mime_type + ";base64," + base64_encode(img.bytes)}}}});
    }
  }
  const nlohmann::json body = {
      {"model", config_.model_name},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
      {"response_format", {{"type", "json_object"}}},
      {"messages",
       {{{"role", "system"}, {"content", request.system_text}}, {{"role", "user"}, {"content", user_content}}}},
  };

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  ++sent_;
  auto res = client.Post(url.path + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::Timeout, "provider request timed out");
    }
    throw Error(ErrorCode::TransportFailed, "provider request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::TransportFailed, "provider returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TransportFailed, std::string("unexpected provider envelope: ") + e.what());
  }
}

}  // namespace conflictlens::gateway
