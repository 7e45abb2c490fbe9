#pragma once

// Wire-level data types shared by the ingest client and the analysis server.
// Everything here is a plain value type: immutable once built, safe to share
// across threads, and encodable through artifact/codec.hpp.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mlfix::artifact {

enum class ColumnKind { numeric, categorical, text, datetime, identifier };
enum class TaskType { classification, regression };
enum class CheckCategory { data_integrity, train_test_validation, model_evaluation };
enum class CheckStatus { pass, warn, fail, error, skipped };
enum class SourceAgent { dataset, checks, checkpoint, reasoner };
enum class Severity { critical, high, medium, low, info };
enum class DatasetRef { train, test };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(TaskType task);
std::string_view to_string(CheckCategory category);
std::string_view to_string(CheckStatus status);
std::string_view to_string(SourceAgent agent);
std::string_view to_string(Severity severity);
std::string_view to_string(DatasetRef ref);

// The parse_* functions return nullopt for names outside the enum.
std::optional<ColumnKind> parse_column_kind(std::string_view name);
std::optional<TaskType> parse_task_type(std::string_view name);
std::optional<CheckCategory> parse_check_category(std::string_view name);
std::optional<CheckStatus> parse_check_status(std::string_view name);
std::optional<SourceAgent> parse_source_agent(std::string_view name);
std::optional<Severity> parse_severity(std::string_view name);
std::optional<DatasetRef> parse_dataset_ref(std::string_view name);

/// Ranking weight: critical 4, high 3, medium 2, low 1, info 0.
int severity_weight(Severity severity);

/// True when `a` is at least as severe as `b`.
inline bool at_least(Severity a, Severity b) {
    return static_cast<int>(a) <= static_cast<int>(b);
}

// ---------------------------------------------------------------------------
// Dataset statistics

struct NumericSummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;

    bool operator==(const NumericSummary&) const = default;
};

struct CategoryCount {
    std::string value;
    std::int64_t count = 0;

    bool operator==(const CategoryCount&) const = default;
};

struct ColumnStatistics {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    double null_fraction = 0.0;
    std::int64_t distinct_count = 0;
    std::optional<NumericSummary> numeric_summary;
    std::vector<CategoryCount> top_categories;

    bool operator==(const ColumnStatistics&) const = default;
};

struct DatasetStatistics {
    std::int64_t sample_count = 0;
    std::vector<ColumnStatistics> per_column;
    std::optional<std::map<std::string, std::int64_t>> class_distribution;

    bool operator==(const DatasetStatistics&) const = default;
};

// ---------------------------------------------------------------------------
// Check results

struct CheckResult {
    std::string check_id;
    CheckCategory category = CheckCategory::data_integrity;
    CheckStatus status = CheckStatus::skipped;
    std::map<std::string, double> metrics;
    std::string condition;
    std::string summary;
    std::map<std::string, double> details;

    bool operator==(const CheckResult&) const = default;
};

using ScalarValue = std::variant<bool, std::int64_t, double, std::string>;

struct CheckpointMetadata {
    std::string architecture;
    std::int64_t parameter_count = 0;
    std::optional<std::int64_t> num_classes;
    std::optional<std::string> docstring;
    std::map<std::string, ScalarValue> training_config;

    bool operator==(const CheckpointMetadata&) const = default;
};

/// Model outputs for one split. Classification sets `predicted_labels`,
/// regression sets `predicted_values`; never both.
struct PredictionSet {
    DatasetRef dataset_ref = DatasetRef::test;
    std::vector<std::string> predicted_labels;
    std::vector<double> predicted_values;
    std::optional<std::vector<std::vector<double>>> probabilities;
    std::optional<std::vector<std::string>> class_order;

    bool is_regression() const { return !predicted_values.empty(); }
    std::size_t size() const {
        return is_regression() ? predicted_values.size() : predicted_labels.size();
    }

    bool operator==(const PredictionSet&) const = default;
};

inline constexpr std::string_view kBundleVersion = "1.0";
inline constexpr std::string_view kModalityTabular = "tabular";

struct ArtifactBundle {
    std::string bundle_version{kBundleVersion};
    std::string modality{kModalityTabular};
    std::string created_at;  // ISO-8601 UTC, e.g. 2026-01-31T12:00:00Z
    DatasetStatistics train_stats;
    DatasetStatistics test_stats;
    std::vector<CheckResult> integrity_results;
    std::vector<CheckResult> validation_results;
    std::vector<CheckResult> evaluation_results;
    std::optional<CheckpointMetadata> checkpoint;
    std::map<std::string, std::string> client_info;

    /// All results across the three suites, integrity first.
    std::vector<const CheckResult*> all_results() const;
    const CheckResult* find_result(std::string_view check_id) const;

    bool operator==(const ArtifactBundle&) const = default;
};

// ---------------------------------------------------------------------------
// Analysis outputs

struct Evidence {
    std::string check_id;
    std::string metric;
    double value = 0.0;

    bool operator==(const Evidence&) const = default;
};

struct Finding {
    std::string finding_id;
    SourceAgent source_agent = SourceAgent::checks;
    Severity severity = Severity::info;
    double confidence = 0.0;
    std::vector<Evidence> evidence;
    std::string description;

    bool operator==(const Finding&) const = default;
};

struct Hypothesis {
    std::string statement;
    std::vector<std::string> supporting_findings;
    std::vector<std::string> kb_citations;
    double plausibility = 0.0;

    bool operator==(const Hypothesis&) const = default;
};

struct RankedFinding {
    Finding finding;
    double rank_score = 0.0;

    bool operator==(const RankedFinding&) const = default;
};

struct Action {
    std::string action;
    std::string rationale;
    std::vector<std::string> linked_findings;

    bool operator==(const Action&) const = default;
};

struct ConsensusSummary {
    std::int64_t samples = 0;
    double agreement = 0.0;
    std::string root_cause_category;
    double confidence = 0.0;

    bool operator==(const ConsensusSummary&) const = default;
};

struct Diagnosis {
    std::vector<RankedFinding> ranked_findings;
    std::vector<Hypothesis> hypotheses;
    std::vector<Action> actions;
    std::string summary;
    ConsensusSummary consensus;
    bool degraded = false;

    bool operator==(const Diagnosis&) const = default;
};

// ---------------------------------------------------------------------------
// Provider-agnostic chat completion contract

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct LLMRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::int64_t max_tokens = 1024;
    std::optional<std::string> response_format_hint;
    std::optional<std::int64_t> seed;

    bool operator==(const LLMRequest&) const = default;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct LLMResponse {
    std::string content;
    std::string provider_id;
    TokenUsage usage;

    bool operator==(const LLMResponse&) const = default;
};

}  // namespace mlfix::artifact
