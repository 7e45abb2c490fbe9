#pragma once

// Canonical JSON wire encoding. Canonical means: object keys sorted, no
// insignificant whitespace, UTF-8, floats in their shortest round-tripping
// decimal form, NaN/Inf rejected. Decoding validates every type invariant and
// reports the offending field as a JSON path such as
// `validation_results[3].metrics.cramers_v`.

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mlfix/artifact/table.hpp"
#include "mlfix/artifact/types.hpp"

namespace mlfix::artifact {

class DecodeError : public std::runtime_error {
public:
    DecodeError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// The payload is not JSON at all (as opposed to JSON that breaks a contract).
class SyntaxError : public DecodeError {
public:
    using DecodeError::DecodeError;
};

class EncodeError : public std::runtime_error {
public:
    EncodeError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

using Json = nlohmann::json;

Json to_json(const DatasetSchema& schema);
Json to_json(const DatasetStatistics& stats);
Json to_json(const CheckResult& result);
Json to_json(const CheckpointMetadata& meta);
Json to_json(const PredictionSet& predictions);
Json to_json(const ArtifactBundle& bundle);
Json to_json(const Finding& finding);
Json to_json(const Hypothesis& hypothesis);
Json to_json(const Diagnosis& diagnosis);
Json to_json(const LLMRequest& request);
Json to_json(const LLMResponse& response);

DatasetSchema schema_from_json(const Json& json, const std::string& path = "$");
DatasetStatistics statistics_from_json(const Json& json, const std::string& path = "$");
CheckResult check_result_from_json(const Json& json, const std::string& path = "$");
CheckpointMetadata checkpoint_from_json(const Json& json, const std::string& path = "$");
PredictionSet predictions_from_json(const Json& json, const std::string& path = "$");
ArtifactBundle bundle_from_json(const Json& json);
Finding finding_from_json(const Json& json, const std::string& path = "$");
Hypothesis hypothesis_from_json(const Json& json, const std::string& path = "$");
Diagnosis diagnosis_from_json(const Json& json);
LLMRequest request_from_json(const Json& json);
LLMResponse response_from_json(const Json& json);

/// Throws EncodeError naming the first field that breaks a bundle invariant.
void validate_bundle(const ArtifactBundle& bundle);
void validate_diagnosis(const Diagnosis& diagnosis);

/// Compact canonical serialization of any JSON value.
std::string canonical_dump(const Json& json);
/// Parses text, throwing SyntaxError for malformed JSON.
Json parse_json(std::string_view text);

std::string encode_bundle(const ArtifactBundle& bundle);
ArtifactBundle decode_bundle(std::string_view bytes);
std::string encode_diagnosis(const Diagnosis& diagnosis);
Diagnosis decode_diagnosis(std::string_view bytes);
std::string encode_schema(const DatasetSchema& schema);
DatasetSchema decode_schema(std::string_view bytes);

/// Lowercase hex SHA-256 of the canonical bundle encoding.
std::string bundle_hash(const ArtifactBundle& bundle);
std::string sha256_hex(std::string_view data);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace mlfix::artifact
