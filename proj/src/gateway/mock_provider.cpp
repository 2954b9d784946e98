#include <cstdlib>
#include <fstream>

#include <openssl/evp.h>

#include "conflictlens/error.hpp"
#include "conflictlens/gateway/provider.hpp"

namespace conflictlens::gateway {

namespace {

ScriptedResponse response_from_json(const nlohmann::json& rec) {
  const auto kind = rec.at("kind").get<std::string>();
  if (kind == "ok") return ScriptedResponse::ok(rec.at("body"));
  if (kind == "raw") return ScriptedResponse::raw(rec.at("text").get<std::string>());
  if (kind == "timeout") return ScriptedResponse::timeout();
  if (kind == "transport_error") return ScriptedResponse::transport_error();
  throw Error(ErrorCode::ConfigError, "unknown fixture kind: " + kind);
}

nlohmann::json response_to_json(const ScriptedResponse& r) {
  switch (r.kind) {
    case ScriptedResponse::Kind::ok:
      return {{"kind", "ok"}, {"body", nlohmann::json::parse(r.text)}};
    case ScriptedResponse::Kind::raw:
      return {{"kind", "raw"}, {"text", r.text}};
    case ScriptedResponse::Kind::timeout:
      return {{"kind", "timeout"}};
    case ScriptedResponse::Kind::transport_error:
      return {{"kind", "transport_error"}};
  }
  return {};
}

}  // namespace

FixtureMap fixtures_from_json(const nlohmann::json& doc) {
  FixtureMap out;
  try {
    for (const auto& [template_id, script] : doc.at("fixtures").items()) {
      auto& seq = out[template_id];
      for (const auto& rec : script) seq.push_back(response_from_json(rec));
      if (seq.empty()) throw Error(ErrorCode::ConfigError, "empty fixture script for " + template_id);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed fixture document: ") + e.what());
  }
  return out;
}

nlohmann::json fixtures_to_json(const FixtureMap& fixtures) {
  nlohmann::json doc = {{"version", 1}, {"fixtures", nlohmann::json::object()}};
  for (const auto& [template_id, script] : fixtures) {
    auto& arr = doc["fixtures"][template_id] = nlohmann::json::array();
    for (const auto& r : script) arr.push_back(response_to_json(r));
  }
  return doc;
}

FixtureMap load_fixtures(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open fixture file: " + file.string());
  try {
    return fixtures_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "fixture file is not valid JSON: " + std::string(e.what()));
  }
}

MockProvider::MockProvider(FixtureMap fixtures) : fixtures_(std::move(fixtures)) {}

std::string MockProvider::complete(const ProviderRequest& request) {
  ScriptedResponse response;
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    auto it = fixtures_.find(request.template_id);
    if (it == fixtures_.end() || it->second.empty()) {
      throw Error(ErrorCode::UnknownTemplate, "no fixture for template " + request.template_id);
    }
    auto& pos = cursor_[request.template_id];
    response = it->second[std::min(pos, it->second.size() - 1)];
    ++pos;
  }
  switch (response.kind) {
    case ScriptedResponse::Kind::timeout:
      throw Error(ErrorCode::Timeout, "scripted timeout for " + request.template_id);
    case ScriptedResponse::Kind::transport_error:
      throw Error(ErrorCode::TransportFailed, "scripted transport failure for " + request.template_id);
    case ScriptedResponse::Kind::ok:
    case ScriptedResponse::Kind::raw:
      break;
  }
  return response.text;
}

std::vector<ProviderRequest> MockProvider::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t MockProvider::call_count(const std::string& template_id) const {
  std::lock_guard lock(mu_);
  auto it = cursor_.find(template_id);
  return it == cursor_.end() ? 0 : it->second;
}

void MockProvider::set_script(const std::string& template_id, std::vector<ScriptedResponse> script) {
  std::lock_guard lock(mu_);
  fixtures_[template_id] = std::move(script);
  cursor_[template_id] = 0;
}

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {}

std::string RecordingProvider::complete(const ProviderRequest& request) {
  ScriptedResponse captured;
  std::string text;
  try {
    text = inner_->complete(request);
    try {
      captured = ScriptedResponse::ok(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error&) {
      captured = ScriptedResponse::raw(text);
    }
  } catch (const Error& e) {
    captured = e.code() == ErrorCode::Timeout ? ScriptedResponse::timeout()
                                              : ScriptedResponse::transport_error();
    std::lock_guard lock(mu_);
    recorded_[request.template_id].push_back(captured);
    throw;
  }
  std::lock_guard lock(mu_);
  recorded_[request.template_id].push_back(std::move(captured));
  return text;
}

FixtureMap RecordingProvider::recorded() const {
  std::lock_guard lock(mu_);
  return recorded_;
}

ProviderConfig provider_config_from_env(ProviderConfig base) {
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return (v != nullptr && *v != '\0') ? v : nullptr;
  };
  auto to_int = [](const char* name, const char* v) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, std::string(name) + " is not an integer");
    }
  };
  if (const char* v = env("CONFLICTLENS_BASE_URL")) base.base_url = v;
  if (const char* v = env("CONFLICTLENS_API_KEY")) base.api_key = v;
  if (const char* v = env("CONFLICTLENS_MODEL")) base.model_name = v;
  if (const char* v = env("CONFLICTLENS_TIMEOUT_MS")) base.timeout_ms = to_int("CONFLICTLENS_TIMEOUT_MS", v);
  if (const char* v = env("CONFLICTLENS_RETRY_BUDGET")) base.retry_budget = to_int("CONFLICTLENS_RETRY_BUDGET", v);
  return base;
}

ProviderConfig load_provider_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open provider config: " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "provider config is not valid JSON: " + std::string(e.what()));
  }
  if (doc.contains("api_key")) {
    throw Error(ErrorCode::ConfigError, "api_key must come from CONFLICTLENS_API_KEY, not a file");
  }
  ProviderConfig cfg;
  cfg.base_url = doc.value("base_url", "");
  cfg.model_name = doc.value("model_name", "");
  cfg.timeout_ms = doc.value("timeout_ms", cfg.timeout_ms);
  cfg.retry_budget = doc.value("retry_budget", cfg.retry_budget);
  cfg = provider_config_from_env(cfg);
  if (cfg.retry_budget < 0) throw Error(ErrorCode::ConfigError, "retry_budget must be >= 0");
  return cfg;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace conflictlens::gateway
