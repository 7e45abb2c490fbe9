#include "mlfix/artifact/types.hpp"

#include <array>
#include <utility>

namespace mlfix::artifact {
namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view name) {
    for (const auto& [value, text] : table) {
        if (text == name) return value;
    }
    return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
    for (const auto& [v, text] : table) {
        if (v == value) return text;
    }
    return "unknown";
}

constexpr std::array<std::pair<ColumnKind, std::string_view>, 5> kColumnKinds{{
    {ColumnKind::numeric, "numeric"},
    {ColumnKind::categorical, "categorical"},
    {ColumnKind::text, "text"},
    {ColumnKind::datetime, "datetime"},
    {ColumnKind::identifier, "identifier"},
}};

constexpr std::array<std::pair<TaskType, std::string_view>, 2> kTasks{{
    {TaskType::classification, "classification"},
    {TaskType::regression, "regression"},
}};

constexpr std::array<std::pair<CheckCategory, std::string_view>, 3> kCategories{{
    {CheckCategory::data_integrity, "data_integrity"},
    {CheckCategory::train_test_validation, "train_test_validation"},
    {CheckCategory::model_evaluation, "model_evaluation"},
}};

constexpr std::array<std::pair<CheckStatus, std::string_view>, 5> kStatuses{{
    {CheckStatus::pass, "pass"},
    {CheckStatus::warn, "warn"},
    {CheckStatus::fail, "fail"},
    {CheckStatus::error, "error"},
    {CheckStatus::skipped, "skipped"},
}};

constexpr std::array<std::pair<SourceAgent, std::string_view>, 4> kAgents{{
    {SourceAgent::dataset, "dataset"},
    {SourceAgent::checks, "checks"},
    {SourceAgent::checkpoint, "checkpoint"},
    {SourceAgent::reasoner, "reasoner"},
}};

constexpr std::array<std::pair<Severity, std::string_view>, 5> kSeverities{{
    {Severity::critical, "critical"},
    {Severity::high, "high"},
    {Severity::medium, "medium"},
    {Severity::low, "low"},
    {Severity::info, "info"},
}};

constexpr std::array<std::pair<DatasetRef, std::string_view>, 2> kDatasetRefs{{
    {DatasetRef::train, "train"},
    {DatasetRef::test, "test"},
}};

}  // namespace

std::string_view to_string(ColumnKind kind) { return name_of(kColumnKinds, kind); }
std::string_view to_string(TaskType task) { return name_of(kTasks, task); }
std::string_view to_string(CheckCategory category) { return name_of(kCategories, category); }
std::string_view to_string(CheckStatus status) { return name_of(kStatuses, status); }
std::string_view to_string(SourceAgent agent) { return name_of(kAgents, agent); }
std::string_view to_string(Severity severity) { return name_of(kSeverities, severity); }
std::string_view to_string(DatasetRef ref) { return name_of(kDatasetRefs, ref); }

std::optional<ColumnKind> parse_column_kind(std::string_view name) { return lookup(kColumnKinds, name); }
std::optional<TaskType> parse_task_type(std::string_view name) { return lookup(kTasks, name); }
std::optional<CheckCategory> parse_check_category(std::string_view name) { return lookup(kCategories, name); }
std::optional<CheckStatus> parse_check_status(std::string_view name) { return lookup(kStatuses, name); }
std::optional<SourceAgent> parse_source_agent(std::string_view name) { return lookup(kAgents, name); }
std::optional<Severity> parse_severity(std::string_view name) { return lookup(kSeverities, name); }
std::optional<DatasetRef> parse_dataset_ref(std::string_view name) { return lookup(kDatasetRefs, name); }

int severity_weight(Severity severity) {
    switch (severity) {
        case Severity::critical: return 4;
        case Severity::high: return 3;
        case Severity::medium: return 2;
        case Severity::low: return 1;
        case Severity::info: return 0;
    }
    return 0;
}

std::vector<const CheckResult*> ArtifactBundle::all_results() const {
    std::vector<const CheckResult*> out;
    out.reserve(integrity_results.size() + validation_results.size() + evaluation_results.size());
    for (const auto* list : {&integrity_results, &validation_results, &evaluation_results}) {
        for (const auto& r : *list) out.push_back(&r);
    }
    return out;
}

const CheckResult* ArtifactBundle::find_result(std::string_view check_id) const {
    for (const auto* r : all_results()) {
        if (r->check_id == check_id) return r;
    }
    return nullptr;
}

}  // namespace mlfix::artifact
