#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mlfix::agents {

/// The first balanced top-level {...} in `completion`, skipping braces that
/// sit inside JSON strings. nullopt when there is none or it does not parse.
std::optional<nlohmann::json> extract_json_object(std::string_view completion);

class TemplateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Prompt templates are plain text with {{name}} placeholders.
class PromptTemplate {
public:
    PromptTemplate(std::string name, std::string text) : name_(std::move(name)), text_(std::move(text)) {}

    /// Throws TemplateError if a placeholder has no value.
    std::string render(const std::map<std::string, std::string>& values) const;
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::string text_;
};

/// Looks up a template shipped with the binary, e.g. "dataset". Throws
/// TemplateError for unknown names.
const PromptTemplate& prompt_template(std::string_view name);

}  // namespace mlfix::agents
