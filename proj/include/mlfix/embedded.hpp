#pragma once

// Files compiled into the binary at build time (prompt templates, seed
// knowledge base).

#include <span>
#include <string_view>

namespace mlfix {

struct EmbeddedFile {
    std::string_view path;  // relative to the resource directory
    std::string_view content;
};

}  // namespace mlfix
