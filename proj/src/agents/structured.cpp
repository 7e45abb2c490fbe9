#include "mlfix/agents/structured.hpp"

#include <span>
#include <vector>

#include "mlfix/embedded.hpp"

namespace mlfix::agents {

namespace resources {
std::span<const EmbeddedFile> files();
}

std::optional<nlohmann::json> extract_json_object(std::string_view completion) {
    const auto start = completion.find('{');
    if (start == std::string_view::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < completion.size(); ++i) {
        const char c = completion[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}' && --depth == 0) {
            try {
                return nlohmann::json::parse(completion.substr(start, i - start + 1));
            } catch (const nlohmann::json::parse_error&) {
                return std::nullopt;
            }
        }
    }
    return std::nullopt;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text_.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = text_.find("}}", open + 2);
        if (close == std::string::npos) break;
        const auto key = text_.substr(open + 2, close - open - 2);
        const auto it = values.find(key);
        if (it == values.end()) throw TemplateError(name_ + ": no value for {{" + key + "}}");
        out.append(text_, pos, open - pos);
        out += it->second;
        pos = close + 2;
    }
    out.append(text_, pos);
    return out;
}

const PromptTemplate& prompt_template(std::string_view name) {
    static const std::vector<PromptTemplate> templates = [] {
        std::vector<PromptTemplate> out;
        for (const auto& f : resources::files()) {
            auto stem = std::string(f.path);
            if (const auto dot = stem.find('.'); dot != std::string::npos) stem.resize(dot);
            out.emplace_back(stem, std::string(f.content));
        }
        return out;
    }();
    for (const auto& t : templates) {
        if (t.name() == name) return t;
    }
    throw TemplateError("unknown prompt template: " + std::string(name));
}

}  // namespace mlfix::agents
