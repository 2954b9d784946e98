#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace conflictlens::gateway {

struct ImageAttachment {
  std::string mime_type;  // image/png or image/jpeg
  std::string bytes;
};

struct ProviderRequest {
  std::string template_id;
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::vector<ImageAttachment> images;
  int attempt = 0;
};

// A chat-completion backend. complete() returns the raw assistant text or
// throws Error with TransportFailed, Timeout or UnknownTemplate.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const ProviderRequest& request) = 0;
};

struct ScriptedResponse {
  enum class Kind { ok, raw, timeout, transport_error };
  Kind kind = Kind::ok;
  std::string text;  // serialized body for ok, verbatim text for raw

  static ScriptedResponse ok(const nlohmann::json& body) { return {Kind::ok, body.dump()}; }
  static ScriptedResponse raw(std::string text) { return {Kind::raw, std::move(text)}; }
  static ScriptedResponse timeout() { return {Kind::timeout, {}}; }
  static ScriptedResponse transport_error() { return {Kind::transport_error, {}}; }
};

using FixtureMap = std::map<std::string, std::vector<ScriptedResponse>>;

// Fixture file: {"version": 1, "fixtures": {"<template_id>": [<response>...]}}
// where a response is {"kind": "ok", "body": <json>}, {"kind": "raw",
// "text": "..."}, {"kind": "timeout"} or {"kind": "transport_error"}.
FixtureMap fixtures_from_json(const nlohmann::json& doc);
nlohmann::json fixtures_to_json(const FixtureMap& fixtures);
FixtureMap load_fixtures(const std::filesystem::path& file);

// Deterministic fixture-driven provider. The n-th call for a template gets
// the n-th scripted response; once the script is exhausted the last response
// repeats. Every request is recorded for audits.
class MockProvider final : public Provider {
 public:
  explicit MockProvider(FixtureMap fixtures);

  std::string complete(const ProviderRequest& request) override;

  [[nodiscard]] std::vector<ProviderRequest> requests() const;
  [[nodiscard]] std::size_t call_count(const std::string& template_id) const;
  void set_script(const std::string& template_id, std::vector<ScriptedResponse> script);

 private:
  mutable std::mutex mu_;
  FixtureMap fixtures_;
  std::map<std::string, std::size_t> cursor_;
  std::vector<ProviderRequest> requests_;
};

// Wraps a live provider and captures each outcome as a scripted response so
// a session can be replayed offline with MockProvider.
class RecordingProvider final : public Provider {
 public:
  explicit RecordingProvider(std::shared_ptr<Provider> inner);

  std::string complete(const ProviderRequest& request) override;

  [[nodiscard]] FixtureMap recorded() const;

 private:
  std::shared_ptr<Provider> inner_;
  mutable std::mutex mu_;
  FixtureMap recorded_;
};

struct ProviderConfig {
  std::string base_url;
  std::string api_key;  // environment only; never serialized
  std::string model_name;
  int timeout_ms = 30000;
  int retry_budget = 2;
};

// Reads CONFLICTLENS_BASE_URL, CONFLICTLENS_API_KEY, CONFLICTLENS_MODEL,
// CONFLICTLENS_TIMEOUT_MS and CONFLICTLENS_RETRY_BUDGET on top of `base`.
ProviderConfig provider_config_from_env(ProviderConfig base = {});

// Loads {base_url, model_name, timeout_ms, retry_budget} from a JSON file and
// layers the environment on top. A file carrying an api_key is rejected.
ProviderConfig load_provider_config(const std::filesystem::path& file);

// OpenAI-compatible /chat/completions client.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config);

  std::string complete(const ProviderRequest& request) override;

  // Process-wide count of requests put on the wire; the offline test suites
  // assert it stays zero.
  static std::size_t requests_sent() noexcept { return sent_.load(); }

 private:
  ProviderConfig config_;
  static inline std::atomic<std::size_t> sent_{0};
};

std::string base64_encode(std::string_view bytes);

}  // namespace conflictlens::gateway
