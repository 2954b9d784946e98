#pragma once

#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace conflictlens {

enum class PatternId { EMAIL, PHONE, URL, HANDLE, PROPER_NAME_HINT };

std::string_view to_string(PatternId id) noexcept;

struct RedactionCount {
  PatternId pattern_id;
  int count = 0;

  friend bool operator==(const RedactionCount&, const RedactionCount&) = default;
};

// Only classes that fired are listed, each with count >= 1.
struct RedactionReport {
  std::vector<RedactionCount> replacements;

  [[nodiscard]] int count(PatternId id) const noexcept;
  [[nodiscard]] bool empty() const noexcept { return replacements.empty(); }
  void add(PatternId id, int n);
  void merge(const RedactionReport& other);

  friend bool operator==(const RedactionReport&, const RedactionReport&) = default;
};

struct RedactionOptions {
  // Heuristic name scrubbing: capitalized tokens equal to one of the hints.
  bool proper_names = false;
  std::vector<std::string> name_hints;
};

class Redactor {
 public:
  struct Rule {
    PatternId id;
    std::regex pattern;
    std::string replacement;  // may reference $1
  };

  // Loads the versioned pattern table.
  static Redactor load(const std::filesystem::path& file, RedactionOptions options = {});
  // The bundled table under CONFLICTLENS_DATA_DIR, loaded once.
  static const Redactor& bundled();

  // Runs the ordered passes until nothing fires. A placeholder's closing
  // bracket can become the boundary a neighbouring match needed, so one
  // pass is not always enough.
  [[nodiscard]] std::pair<std::string, RedactionReport> redact(std::string_view text) const;

  // Applies a single pattern class; returns the rewritten text and the
  // number of replacements.
  [[nodiscard]] std::pair<std::string, int> apply(std::string_view text, PatternId id) const;

  // True when any active pattern would fire on text.
  [[nodiscard]] bool matches_any(std::string_view text) const;

  [[nodiscard]] std::vector<PatternId> pattern_order() const;

 private:
  std::vector<Rule> rules_;
};

// Redacts with the bundled table and default options.
std::pair<std::string, RedactionReport> redact(std::string_view text);

void to_json(nlohmann::json& j, const RedactionReport& r);
void from_json(const nlohmann::json& j, RedactionReport& r);

}  // namespace conflictlens
