#include "conflictlens/gateway/prompt_template.hpp"

#include <fstream>
#include <optional>
#include <set>

#include "conflictlens/error.hpp"

namespace conflictlens::gateway {

namespace {

struct Placeholder {
  std::size_t begin;
  std::size_t end;  // one past the closing braces
  std::string name;
};

std::optional<Placeholder> next_placeholder(const std::string& text, std::size_t from) {
  const auto open = text.find("{{", from);
  if (open == std::string::npos) return std::nullopt;
  const auto close = text.find("}}", open + 2);
  if (close == std::string::npos) return std::nullopt;
  return Placeholder{open, close + 2, text.substr(open + 2, close - open - 2)};
}

std::string substitute(const std::string& text, const Bindings& bindings, const std::string& template_id) {
  std::string out;
  std::size_t pos = 0;
  while (auto ph = next_placeholder(text, pos)) {
    out.append(text, pos, ph->begin - pos);
    auto it = bindings.find(ph->name);
    if (it == bindings.end()) {
      throw Error(ErrorCode::MissingBinding, template_id + ": no binding for {{" + ph->name + "}}");
    }
    out += it->second;
    pos = ph->end;
  }
  out.append(text, pos);
  return out;
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
  std::set<std::string> names;
  for (const auto* text : {&system_text, &user_text}) {
    std::size_t pos = 0;
    while (auto ph = next_placeholder(*text, pos)) {
      names.insert(ph->name);
      pos = ph->end;
    }
  }
  return {names.begin(), names.end()};
}

RenderedPrompt render(const PromptTemplate& tpl, const Bindings& bindings) {
  return {substitute(tpl.system_text, bindings, tpl.template_id),
          substitute(tpl.user_text, bindings, tpl.template_id)};
}

TemplateRegistry::TemplateRegistry(std::vector<PromptTemplate> templates) {
  for (auto& t : templates) {
    auto id = t.template_id;
    templates_.emplace(std::move(id), std::move(t));
  }
}

TemplateRegistry TemplateRegistry::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open template file: " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "template file is not valid JSON: " + std::string(e.what()));
  }
  std::vector<PromptTemplate> out;
  for (const auto& rec : doc.at("templates")) {
    PromptTemplate t;
    t.template_id = rec.at("template_id").get<std::string>();
    auto join = [](const nlohmann::json& v) {
      if (v.is_string()) return v.get<std::string>();
      std::string s;
      for (const auto& line : v) s += line.get<std::string>() + "\n";
      if (!s.empty()) s.pop_back();
      return s;
    };
    t.system_text = join(rec.at("system"));
    t.user_text = join(rec.at("user"));
    t.output_schema = rec.at("output_schema");
    t.temperature = rec.at("temperature").get<double>();
    t.max_output_tokens = rec.at("max_output_tokens").get<int>();
    out.push_back(std::move(t));
  }
  return TemplateRegistry(std::move(out));
}

const PromptTemplate& TemplateRegistry::get(const std::string& template_id) const {
  auto it = templates_.find(template_id);
  if (it == templates_.end()) throw Error(ErrorCode::UnknownTemplate, "unknown template: " + template_id);
  return it->second;
}

bool TemplateRegistry::contains(const std::string& template_id) const {
  return templates_.count(template_id) != 0;
}

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, unused] : templates_) out.push_back(id);
  return out;
}

}  // namespace conflictlens::gateway
