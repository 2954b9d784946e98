#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflictlens/gateway/prompt_template.hpp"
#include "conflictlens/gateway/provider.hpp"

namespace conflictlens::gateway {

enum class AttemptOutcome { ok, schema_fail, transport_fail };

std::string_view to_string(AttemptOutcome o) noexcept;

struct LogEntry {
  std::string template_id;
  std::string rendered_payload_hash;  // sha256 hex of the outbound payload
  bool redaction_checked = false;
  AttemptOutcome outcome = AttemptOutcome::ok;
};

// Append-only, one entry per attempt including retries.
class RequestLog {
 public:
  void append(LogEntry entry);
  [[nodiscard]] std::vector<LogEntry> entries() const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::string to_jsonl() const;

 private:
  mutable std::mutex mu_;
  std::vector<LogEntry> entries_;
};

// Rewrites outbound prompt text before it leaves the process. The service
// installs the redactor here.
using OutboundFilter = std::function<std::string(std::string_view)>;

struct GatewayOptions {
  int retry_budget = 2;
};

// Single mediation point for inference: render, filter, send, parse,
// validate. A reply that fails to parse or validate is retried with a
// corrective instruction until the retry budget is spent; transport failures
// and timeouts are surfaced immediately.
class Gateway {
 public:
  Gateway(TemplateRegistry templates, std::shared_ptr<Provider> provider, GatewayOptions options = {},
          OutboundFilter filter = {});

  // Throws UnknownTemplate, MissingBinding, SchemaValidationFailed,
  // TransportFailed or Timeout.
  nlohmann::json invoke(const std::string& template_id, const Bindings& bindings,
                        const std::optional<nlohmann::json>& schema = std::nullopt,
                        const std::vector<ImageAttachment>& images = {});

  [[nodiscard]] const RequestLog& log() const noexcept { return log_; }
  [[nodiscard]] const TemplateRegistry& templates() const noexcept { return templates_; }
  [[nodiscard]] int retry_budget() const noexcept { return options_.retry_budget; }

 private:
  TemplateRegistry templates_;
  std::shared_ptr<Provider> provider_;
  GatewayOptions options_;
  OutboundFilter filter_;
  RequestLog log_;
};

// Parses a provider reply, tolerating a surrounding ```json fence.
std::optional<nlohmann::json> parse_reply(std::string_view text);

std::string sha256_hex(std::string_view data);

}  // namespace conflictlens::gateway
