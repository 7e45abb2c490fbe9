#pragma once

// Phase-1 client flow: read the splits and sidecars, run the check suites,
// and assemble an aggregate-only ArtifactBundle.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "mlfix/artifact/types.hpp"

namespace mlfix::ingest {

/// Any problem with the user's inputs (CLI exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IngestConfig {
    std::filesystem::path train_path;
    std::optional<std::filesystem::path> test_path;
    std::filesystem::path schema_path;
    std::optional<std::filesystem::path> predictions_train_path;
    std::optional<std::filesystem::path> predictions_test_path;
    std::optional<std::filesystem::path> checkpoint_path;
    std::optional<std::filesystem::path> config_path;  // CheckConfig overrides
    std::filesystem::path output_path;
};

/// Reads every input and runs the suites. Throws InputError naming the
/// offending file.
artifact::ArtifactBundle build_bundle(const IngestConfig& config);

/// build_bundle, then writes the canonical encoding to output_path. The file
/// appears atomically: on any error nothing is written.
artifact::ArtifactBundle ingest(const IngestConfig& config);

/// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// ISO-8601 UTC time; honours SOURCE_DATE_EPOCH for reproducible bundles.
std::string utc_timestamp();

}  // namespace mlfix::ingest
