#include "conflictlens/ingestion.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"

namespace conflictlens {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::uint32_t read_be32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[at + i]);
  return v;
}

}  // namespace

std::string Transcript::render() const {
  std::string out;
  for (const auto& m : messages) {
    out += to_string(m.speaker);
    out += ": ";
    out += m.text;
    out += '\n';
  }
  return out;
}

bool is_valid(const Transcript& t) {
  if (t.messages.size() < 2) return false;
  bool has_self = false;
  bool has_partner = false;
  for (std::size_t i = 0; i < t.messages.size(); ++i) {
    const auto& m = t.messages[i];
    if (m.ordinal != static_cast<int>(i)) return false;
    if (trim(m.text).empty()) return false;
    (m.speaker == Partner::self ? has_self : has_partner) = true;
  }
  return has_self && has_partner;
}

std::optional<std::string> detect_image_type(std::string_view bytes) {
  static constexpr std::string_view kPngSignature("\x89PNG\r\n\x1a\n", 8);
  if (bytes.size() >= 33 && bytes.substr(0, 8) == kPngSignature && read_be32(bytes, 8) == 13 &&
      bytes.substr(12, 4) == "IHDR" && read_be32(bytes, 16) > 0 && read_be32(bytes, 20) > 0) {
    return "image/png";
  }
  if (bytes.size() >= 4 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
      static_cast<unsigned char>(bytes[1]) == 0xD8 && static_cast<unsigned char>(bytes[2]) == 0xFF &&
      static_cast<unsigned char>(bytes[bytes.size() - 2]) == 0xFF &&
      static_cast<unsigned char>(bytes[bytes.size() - 1]) == 0xD9) {
    return "image/jpeg";
  }
  return std::nullopt;
}

ExtractionResult extract_transcript(gateway::Gateway& gw, std::span<const ImageBlob> images,
                                    const Redactor& redactor, const IngestionOptions& options) {
  if (images.empty() || images.size() > options.max_images) {
    throw Error(ErrorCode::UnsupportedImage,
                "expected 1.." + std::to_string(options.max_images) + " screenshots, got " +
                    std::to_string(images.size()));
  }
  std::vector<gateway::ImageAttachment> attachments;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    if (img.bytes.size() > options.max_image_bytes) {
      throw Error(ErrorCode::UnsupportedImage, "screenshot " + std::to_string(i) + " exceeds the size cap");
    }
    auto mime = detect_image_type(img.bytes);
    if (!mime) throw Error(ErrorCode::UnsupportedImage, "screenshot " + std::to_string(i) + " is not a PNG or JPEG");
    attachments.push_back({*mime, img.bytes});
  }

  ExtractionResult result;
  for (std::size_t i = 0; i < attachments.size(); ++i) {
    nlohmann::json reply;
    try {
      reply = gw.invoke("extract_transcript_v1",
                        {{"image_index", std::to_string(i + 1)}, {"image_count", std::to_string(images.size())}},
                        std::nullopt, {attachments[i]});
    } catch (const Error& e) {
      throw Error(ErrorCode::ExtractionFailed, std::string("transcript extraction failed: ") + e.what());
    }
    try {
      for (const auto& rec : reply.at("messages")) {
        auto text = trim(rec.at("text").get<std::string>());
        if (text.empty()) continue;
        auto [clean, report] = redactor.redact(text);
        result.redaction.merge(report);
        result.transcript.messages.push_back(
            {partner_from_string(rec.at("speaker").get<std::string>()), std::move(clean), 0});
      }
      if (!result.transcript.topic_hint) {
        if (auto it = reply.find("topic_hint"); it != reply.end() && it->is_string()) {
          auto hint = trim(it->get<std::string>());
          if (!hint.empty()) {
            auto [clean, report] = redactor.redact(hint);
            result.redaction.merge(report);
            result.transcript.topic_hint = std::move(clean);
          }
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ExtractionFailed, std::string("malformed transcript structure: ") + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::ExtractionFailed, std::string("malformed transcript structure: ") + e.what());
    }
  }

  auto& messages = result.transcript.messages;
  if (messages.empty()) throw Error(ErrorCode::EmptyTranscript, "no messages found in the screenshots");
  for (std::size_t i = 0; i < messages.size(); ++i) messages[i].ordinal = static_cast<int>(i);
  if (!is_valid(result.transcript)) {
    throw Error(ErrorCode::ExtractionFailed, "transcript needs at least two messages from both speakers");
  }
  return result;
}

EstimateResult estimate_questionnaire(gateway::Gateway& gw, const Transcript& t, Partner partner,
                                      std::span<const QuestionnaireItem> items) {
  if (!is_valid(t)) throw Error(ErrorCode::InvalidInput, "transcript is not valid");
  std::string item_list;
  for (const auto& item : items) item_list += std::to_string(item.id) + ". " + item.prompt + "\n";
  const std::string description = partner == Partner::self
                                      ? "the person who uploaded the screenshots; their lines are labeled self"
                                      : "the other person in the chat; their lines are labeled partner";
  nlohmann::json reply;
  try {
    reply = gw.invoke("estimate_rpcs_v1", {{"partner", std::string(to_string(partner))},
                                           {"partner_description", description},
                                           {"items", item_list},
                                           {"transcript", t.render()}});
  } catch (const Error& e) {
    throw Error(ErrorCode::EstimationFailed, std::string("questionnaire estimation failed: ") + e.what());
  }

  EstimateResult out;
  out.response.partner = partner;
  out.response.source = ResponseSource::llm_estimated;
  try {
    const auto& arr = reply.at("items");
    if (arr.size() != kQuestionnaireItems) {
      throw Error(ErrorCode::EstimationFailed, "estimate must have 13 items");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const int raw = arr[i].get<int>();
      const int clamped = std::clamp(raw, kLikertMin, kLikertMax);
      if (clamped != raw) {
        out.warnings.push_back("item " + std::to_string(i + 1) + " value " + std::to_string(raw) +
                               " clamped to " + std::to_string(clamped));
      }
      out.response.items.push_back(clamped);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::EstimationFailed, std::string("malformed estimate: ") + e.what());
  }
  return out;
}

void to_json(nlohmann::json& j, const Message& m) {
  j = {{"speaker", m.speaker}, {"text", m.text}, {"ordinal", m.ordinal}};
}

void from_json(const nlohmann::json& j, Message& m) {
  m.speaker = j.at("speaker").get<Partner>();
  m.text = j.at("text").get<std::string>();
  m.ordinal = j.at("ordinal").get<int>();
}

void to_json(nlohmann::json& j, const Transcript& t) {
  j = {{"messages", t.messages}, {"topic_hint", t.topic_hint ? nlohmann::json(*t.topic_hint) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, Transcript& t) {
  t.messages = j.at("messages").get<std::vector<Message>>();
  if (j.contains("topic_hint") && j.at("topic_hint").is_string()) {
    t.topic_hint = j.at("topic_hint").get<std::string>();
  } else {
    t.topic_hint.reset();
  }
}

}  // namespace conflictlens
