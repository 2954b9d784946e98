#include "conflictlens/gateway/gateway.hpp"

#include <openssl/sha.h>

#include <array>
#include <cstdio>

#include "conflictlens/error.hpp"
#include "conflictlens/gateway/schema.hpp"

namespace conflictlens::gateway {

std::string_view to_string(AttemptOutcome o) noexcept {
  switch (o) {
    case AttemptOutcome::ok: return "ok";
    case AttemptOutcome::schema_fail: return "schema_fail";
    case AttemptOutcome::transport_fail: return "transport_fail";
  }
  return "ok";
}

void RequestLog::append(LogEntry entry) {
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(entry));
}

std::vector<LogEntry> RequestLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t RequestLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::string RequestLog::to_jsonl() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& e : entries_) {
    out += nlohmann::json{{"template_id", e.template_id},
                          {"rendered_payload_hash", e.rendered_payload_hash},
                          {"redaction_checked", e.redaction_checked},
                          {"outcome", std::string(to_string(e.outcome))}}
               .dump();
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest.data());
  std::string hex;
  hex.reserve(digest.size() * 2);
  char buf[3];
  for (auto b : digest) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    hex += buf;
  }
  return hex;
}

std::optional<nlohmann::json> parse_reply(std::string_view text) {
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  text = trim(text);
  if (text.starts_with("```")) {
    const auto nl = text.find('\n');
    const auto close = text.rfind("```");
    if (nl != std::string_view::npos && close != std::string_view::npos && close > nl) {
      text = trim(text.substr(nl + 1, close - nl - 1));
    }
  }
  auto parsed = nlohmann::json::parse(text, nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

Gateway::Gateway(TemplateRegistry templates, std::shared_ptr<Provider> provider, GatewayOptions options,
                 OutboundFilter filter)
    : templates_(std::move(templates)),
      provider_(std::move(provider)),
      options_(options),
      filter_(std::move(filter)) {
  if (!provider_) throw Error(ErrorCode::ConfigError, "gateway needs a provider");
  if (options_.retry_budget < 0) throw Error(ErrorCode::ConfigError, "retry budget must be >= 0");
}

nlohmann::json Gateway::invoke(const std::string& template_id, const Bindings& bindings,
                               const std::optional<nlohmann::json>& schema,
                               const std::vector<ImageAttachment>& images) {
  const PromptTemplate& tpl = templates_.get(template_id);
  const nlohmann::json& output_schema = schema ? *schema : tpl.output_schema;
  RenderedPrompt prompt = render(tpl, bindings);
  if (filter_) {
    prompt.system_text = filter_(prompt.system_text);
    prompt.user_text = filter_(prompt.user_text);
  }

  std::string correction;
  std::string last_reason;
  for (int attempt = 0; attempt <= options_.retry_budget; ++attempt) {
    ProviderRequest req;
    req.template_id = template_id;
    req.system_text = prompt.system_text;
    req.user_text = prompt.user_text + correction;
    req.temperature = tpl.temperature;
    req.max_output_tokens = tpl.max_output_tokens;
    req.images = images;
    req.attempt = attempt;

    std::string payload = req.system_text + "\n\n" + req.user_text;
    for (const auto& img : images) payload += "\n" + img.mime_type + ":" + sha256_hex(img.bytes);
    LogEntry entry{template_id, sha256_hex(payload), static_cast<bool>(filter_), AttemptOutcome::ok};

    std::string reply;
    try {
      reply = provider_->complete(req);
    } catch (const Error& e) {
      entry.outcome = AttemptOutcome::transport_fail;
      log_.append(std::move(entry));
      if (e.code() == ErrorCode::Timeout || e.code() == ErrorCode::UnknownTemplate) throw;
      throw Error(ErrorCode::TransportFailed, e.what());
    }

    auto parsed = parse_reply(reply);
    std::optional<std::string> problem;
    if (!parsed) {
      problem = "the reply was not valid JSON";
    } else {
      problem = check_schema(*parsed, output_schema);
    }
    if (!problem) {
      log_.append(std::move(entry));
      return std::move(*parsed);
    }
    entry.outcome = AttemptOutcome::schema_fail;
    log_.append(std::move(entry));
    last_reason = *problem;
    correction = "\n\nYour previous reply was rejected (" + *problem +
                 "). Reply again with only a JSON document that matches the required structure.";
  }
  throw Error(ErrorCode::SchemaValidationFailed,
              template_id + ": no valid reply after " + std::to_string(options_.retry_budget + 1) +
                  " attempts; last problem: " + last_reason);
}

}  // namespace conflictlens::gateway
