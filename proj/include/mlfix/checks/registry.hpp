#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlfix/artifact/table.hpp"
#include "mlfix/artifact/types.hpp"

namespace mlfix::checks {

class RegistryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised inside a check when its data requirements are unmet; run_check
/// turns it into status=skipped with the message as summary.
class SkipCheck : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckConfig {
    /// check_id -> threshold. Missing entries fall back to registry defaults.
    std::map<std::string, double> thresholds;
    double outlier_z_cap = 10.0;
    double outlier_score_threshold = 3.5;
    int ece_bins = 10;
    int drift_tree_depth = 3;
    std::size_t drift_max_rows = 10000;
    double weak_segment_min_fraction = 0.05;
    std::uint64_t random_seed = 42;

    /// Configured or default threshold; throws RegistryError for checks
    /// without one.
    double threshold(std::string_view check_id) const;

    /// Throws ConfigError when a threshold or parameter leaves its range.
    void validate() const;

    /// Applies overrides from `{"thresholds": {...}, "ece_bins": 10, ...}`.
    static CheckConfig from_json(const nlohmann::json& json);
};

struct CheckContext {
    const artifact::TableFrame* train = nullptr;
    const artifact::TableFrame* test = nullptr;
    const artifact::PredictionSet* train_predictions = nullptr;
    const artifact::PredictionSet* test_predictions = nullptr;
    CheckConfig config;

    /// Throws std::invalid_argument when the test schema differs from train
    /// or predictions do not line up with their dataset.
    void validate() const;
};

struct CheckDefinition {
    std::string_view id;
    artifact::CheckCategory category;
    std::optional<double> default_threshold;
    double min_threshold = 0.0;
    double max_threshold = 1.0;
    artifact::CheckResult (*run)(const CheckContext&);
};

/// Registry order is execution order within a suite.
std::span<const CheckDefinition> check_registry();
const CheckDefinition& find_definition(std::string_view check_id);

/// Never throws for a registered id: skips and internal errors surface as
/// statuses. Throws RegistryError for unknown ids.
artifact::CheckResult run_check(std::string_view check_id, const CheckContext& ctx);

/// One result per registered check of `category`, in registry order.
std::vector<artifact::CheckResult> run_suite(artifact::CheckCategory category, const CheckContext& ctx);

}  // namespace mlfix::checks
