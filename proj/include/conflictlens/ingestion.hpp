#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "conflictlens/conflict_model.hpp"
#include "conflictlens/gateway/gateway.hpp"
#include "conflictlens/redaction.hpp"

namespace conflictlens {

struct Message {
  Partner speaker = Partner::self;
  std::string text;
  int ordinal = 0;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Transcript {
  std::vector<Message> messages;
  std::optional<std::string> topic_hint;

  // One "<speaker>: <text>" line per message.
  [[nodiscard]] std::string render() const;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

// Ordinals 0..n-1, non-blank texts, at least two messages, both speakers.
[[nodiscard]] bool is_valid(const Transcript& t);

struct ImageBlob {
  std::string bytes;
  std::string filename;
};

struct IngestionOptions {
  std::size_t max_images = 10;
  std::size_t max_image_bytes = 8 * 1024 * 1024;
};

// image/png or image/jpeg when the header is well formed.
std::optional<std::string> detect_image_type(std::string_view bytes);

struct ExtractionResult {
  Transcript transcript;
  RedactionReport redaction;
};

// One extract_transcript_v1 call per screenshot, concatenated in upload
// order. Messages keep provider order and are re-numbered 0..n-1; blank
// messages are dropped and every text is redacted before it is returned.
//
// Throws UnsupportedImage, EmptyTranscript or ExtractionFailed.
ExtractionResult extract_transcript(gateway::Gateway& gw, std::span<const ImageBlob> images,
                                    const Redactor& redactor, const IngestionOptions& options = {});

struct EstimateResult {
  QuestionnaireResponse response;
  std::vector<std::string> warnings;
};

// estimate_rpcs_v1 for one partner. Out-of-range values are clamped into
// 1..5 with a warning. Throws EstimationFailed.
EstimateResult estimate_questionnaire(gateway::Gateway& gw, const Transcript& t, Partner partner,
                                      std::span<const QuestionnaireItem> items);

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);
void to_json(nlohmann::json& j, const Transcript& t);
void from_json(const nlohmann::json& j, Transcript& t);

}  // namespace conflictlens
