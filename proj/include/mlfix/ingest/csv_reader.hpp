#pragma once

// RFC 4180 CSV reader producing typed TableFrames. Header names are matched
// against the schema regardless of order.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mlfix/artifact/table.hpp"

namespace mlfix::ingest {

/// Malformed input. `line` is 1-based; 0 when the error concerns the whole file.
class CsvError : public std::runtime_error {
public:
    CsvError(std::string source, std::size_t line, const std::string& message);
    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// Parses CSV text. `source` names the input in error messages.
artifact::TableFrame parse_csv(std::string_view text, const artifact::DatasetSchema& schema,
                               std::string_view source = "<memory>");

/// Reads and parses a file; a missing or unreadable file is a CsvError at line 0.
artifact::TableFrame read_csv(const std::filesystem::path& path, const artifact::DatasetSchema& schema);

}  // namespace mlfix::ingest
