#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace conflictlens::gateway {

using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
  std::string template_id;
  std::string system_text;
  std::string user_text;  // {{name}} placeholders
  nlohmann::json output_schema;
  double temperature = 0.0;
  int max_output_tokens = 1024;

  // Sorted, de-duplicated names of every {{placeholder}} in both texts.
  [[nodiscard]] std::vector<std::string> placeholders() const;
};

struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
};

// Substitutes every placeholder. Throws MissingBinding when any placeholder
// has no binding; extra bindings are ignored.
RenderedPrompt render(const PromptTemplate& tpl, const Bindings& bindings);

class TemplateRegistry {
 public:
  TemplateRegistry() = default;
  explicit TemplateRegistry(std::vector<PromptTemplate> templates);

  static TemplateRegistry load(const std::filesystem::path& file);

  // Throws UnknownTemplate.
  [[nodiscard]] const PromptTemplate& get(const std::string& template_id) const;
  [[nodiscard]] bool contains(const std::string& template_id) const;
  [[nodiscard]] std::vector<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

}  // namespace conflictlens::gateway
