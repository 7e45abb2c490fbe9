#include "mlfix/checks/registry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "check_support.hpp"
#include "mlfix/artifact/catalog.hpp"

namespace mlfix::checks {
namespace {

using artifact::CheckCategory;
using artifact::CheckResult;
using artifact::CheckStatus;

constexpr CheckCategory I = CheckCategory::data_integrity;
constexpr CheckCategory V = CheckCategory::train_test_validation;
constexpr CheckCategory E = CheckCategory::model_evaluation;
constexpr double kCountMax = 1e9;

const std::array<CheckDefinition, 28> kRegistry{{
    {"percent_of_nulls", I, 0.05, 0.0, 1.0, detail::percent_of_nulls},
    {"mixed_nulls", I, 1.0, 0.0, 5.0, detail::mixed_nulls},
    {"mixed_data_types", I, 0.1, 0.0, 0.5, detail::mixed_data_types},
    {"string_mismatch", I, 0.0, 0.0, kCountMax, detail::string_mismatch},
    {"special_characters", I, 0.001, 0.0, 1.0, detail::special_characters},
    {"is_single_value", I, 0.0, 0.0, kCountMax, detail::is_single_value},
    {"class_imbalance", I, 0.1, 0.0, 1.0, detail::class_imbalance},
    {"data_duplicates", I, 0.05, 0.0, 1.0, detail::data_duplicates},
    {"conflicting_labels", I, 0.0, 0.0, kCountMax, detail::conflicting_labels},
    {"outlier_sample_detection", I, 0.01, 0.0, 1.0, detail::outlier_sample_detection},
    {"feature_label_correlation", I, 0.9, 0.0, 1.0, detail::feature_label_correlation},
    {"feature_feature_correlation", I, 0.9, 0.0, 1.0, detail::feature_feature_correlation},

    {"datasets_size_comparison", V, 0.1, 0.0, kCountMax, detail::datasets_size_comparison},
    {"new_label", V, 0.0, 0.0, 1.0, detail::new_label},
    {"new_category", V, 0.01, 0.0, 1.0, detail::new_category},
    {"index_leakage", V, 0.0, 0.0, 1.0, detail::index_leakage},
    {"train_test_samples_mix", V, 0.01, 0.0, 1.0, detail::train_test_samples_mix},
    {"label_drift", V, 0.15, 0.0, 1.0, detail::label_drift},
    {"feature_drift", V, 0.2, 0.0, 1.0, detail::feature_drift},
    {"multivariate_drift", V, 0.25, 0.0, 1.0, detail::multivariate_drift},

    {"single_dataset_performance", E, std::nullopt, 0.0, 0.0, detail::single_dataset_performance},
    {"train_test_performance", E, 0.1, 0.0, 2.0, detail::train_test_performance},
    {"confusion_matrix_report", E, std::nullopt, 0.0, 0.0, detail::confusion_matrix_report},
    {"roc_report", E, 0.7, 0.0, 1.0, detail::roc_report},
    {"calibration_score", E, 0.1, 0.0, 1.0, detail::calibration_score},
    {"simple_model_comparison", E, 1.1, 0.0, kCountMax, detail::simple_model_comparison},
    {"weak_segments_performance", E, 0.2, 0.0, 1.0, detail::weak_segments_performance},
    {"prediction_drift", E, 0.2, 0.0, 1.0, detail::prediction_drift},
}};

void require_finite(double value, const std::string& name) {
    if (!std::isfinite(value)) throw ConfigError(name + " must be finite");
}

}  // namespace

std::span<const CheckDefinition> check_registry() { return kRegistry; }

const CheckDefinition& find_definition(std::string_view check_id) {
    for (const auto& d : kRegistry) {
        if (d.id == check_id) return d;
    }
    throw RegistryError("unknown check: " + std::string(check_id));
}

double CheckConfig::threshold(std::string_view check_id) const {
    const auto& def = find_definition(check_id);
    if (!def.default_threshold) throw RegistryError("check has no threshold: " + std::string(check_id));
    const auto it = thresholds.find(std::string(check_id));
    return it == thresholds.end() ? *def.default_threshold : it->second;
}

void CheckConfig::validate() const {
    for (const auto& [id, value] : thresholds) {
        const CheckDefinition* def = nullptr;
        try {
            def = &find_definition(id);
        } catch (const RegistryError&) {
            throw ConfigError("thresholds." + id + ": unknown check");
        }
        if (!def->default_threshold) throw ConfigError("thresholds." + id + ": check takes no threshold");
        require_finite(value, "thresholds." + id);
        if (value < def->min_threshold || value > def->max_threshold) {
            throw ConfigError("thresholds." + id + ": outside [" + artifact::format_double(def->min_threshold) +
                              ", " + artifact::format_double(def->max_threshold) + "]");
        }
    }
    require_finite(outlier_z_cap, "outlier_z_cap");
    if (outlier_z_cap <= 0.0) throw ConfigError("outlier_z_cap must be positive");
    require_finite(outlier_score_threshold, "outlier_score_threshold");
    if (outlier_score_threshold <= 0.0) throw ConfigError("outlier_score_threshold must be positive");
    if (ece_bins < 2 || ece_bins > 1000) throw ConfigError("ece_bins must lie in [2, 1000]");
    if (drift_tree_depth < 1 || drift_tree_depth > 12) throw ConfigError("drift_tree_depth must lie in [1, 12]");
    if (drift_max_rows < 10) throw ConfigError("drift_max_rows must be at least 10");
    require_finite(weak_segment_min_fraction, "weak_segment_min_fraction");
    if (weak_segment_min_fraction <= 0.0 || weak_segment_min_fraction > 1.0) {
        throw ConfigError("weak_segment_min_fraction must lie in (0, 1]");
    }
}

CheckConfig CheckConfig::from_json(const nlohmann::json& json) {
    if (!json.is_object()) throw ConfigError("check config must be an object");
    CheckConfig config;
    auto number = [](const nlohmann::json& v, const std::string& name) {
        if (!v.is_number()) throw ConfigError(name + " must be a number");
        return v.get<double>();
    };
    auto integer = [](const nlohmann::json& v, const std::string& name) {
        if (!v.is_number_integer()) throw ConfigError(name + " must be an integer");
        return v.get<std::int64_t>();
    };
    for (const auto& [key, value] : json.items()) {
        if (key == "thresholds") {
            if (!value.is_object()) throw ConfigError("thresholds must be an object");
            for (const auto& [id, t] : value.items()) config.thresholds[id] = number(t, "thresholds." + id);
        } else if (key == "outlier_z_cap") {
            config.outlier_z_cap = number(value, key);
        } else if (key == "outlier_score_threshold") {
            config.outlier_score_threshold = number(value, key);
        } else if (key == "ece_bins") {
            config.ece_bins = static_cast<int>(std::clamp<std::int64_t>(integer(value, key), -1, 1 << 20));
        } else if (key == "drift_tree_depth") {
            config.drift_tree_depth = static_cast<int>(std::clamp<std::int64_t>(integer(value, key), -1, 1 << 20));
        } else if (key == "drift_max_rows") {
            const auto rows = integer(value, key);
            if (rows < 0) throw ConfigError("drift_max_rows must be at least 10");
            config.drift_max_rows = static_cast<std::size_t>(rows);
        } else if (key == "weak_segment_min_fraction") {
            config.weak_segment_min_fraction = number(value, key);
        } else if (key == "random_seed") {
            if (!value.is_number_unsigned() && !value.is_number_integer()) {
                throw ConfigError("random_seed must be an integer");
            }
            config.random_seed = value.is_number_unsigned() ? value.get<std::uint64_t>()
                                                            : static_cast<std::uint64_t>(value.get<std::int64_t>());
        } else {
            throw ConfigError("unknown check config key: " + key);
        }
    }
    config.validate();
    return config;
}

void CheckContext::validate() const {
    if (train == nullptr) throw std::invalid_argument("check context has no train split");
    train->validate();
    if (test != nullptr) {
        test->validate();
        if (!(test->schema == train->schema)) throw std::invalid_argument("test schema differs from train schema");
    }
    auto check_predictions = [](const artifact::PredictionSet* p, const artifact::TableFrame* frame,
                                artifact::DatasetRef ref, const char* name) {
        if (p == nullptr) return;
        const std::string where = std::string(name) + " predictions";
        if (frame == nullptr) throw std::invalid_argument(where + " reference a missing split");
        if (p->dataset_ref != ref) throw std::invalid_argument(where + " carry the wrong dataset_ref");
        if (p->size() != frame->row_count) throw std::invalid_argument(where + " do not match the row count");
        if (p->probabilities) {
            if (!p->class_order) throw std::invalid_argument(where + " have probabilities without class_order");
            if (p->probabilities->size() != p->size()) {
                throw std::invalid_argument(where + " have a probability row count mismatch");
            }
            for (const auto& row : *p->probabilities) {
                if (row.size() != p->class_order->size()) {
                    throw std::invalid_argument(where + " have a probability width mismatch");
                }
            }
        }
    };
    check_predictions(train_predictions, train, artifact::DatasetRef::train, "train");
    check_predictions(test_predictions, test, artifact::DatasetRef::test, "test");
}

CheckResult run_check(std::string_view check_id, const CheckContext& ctx) {
    const auto& def = find_definition(check_id);
    try {
        ctx.validate();
        auto result = def.run(ctx);
        for (const auto* map : {&result.metrics, &result.details}) {
            for (const auto& [name, value] : *map) {
                if (!std::isfinite(value)) throw std::runtime_error("non-finite value for " + name);
            }
        }
        return result;
    } catch (const SkipCheck& skip) {
        CheckResult r;
        r.check_id = std::string(def.id);
        r.category = def.category;
        r.status = CheckStatus::skipped;
        r.summary = skip.what();
        return r;
    } catch (const std::exception& e) {
        CheckResult r;
        r.check_id = std::string(def.id);
        r.category = def.category;
        r.status = CheckStatus::error;
        r.summary = e.what();
        return r;
    }
}

std::vector<CheckResult> run_suite(CheckCategory category, const CheckContext& ctx) {
    std::vector<CheckResult> out;
    for (const auto& def : kRegistry) {
        if (def.category == category) out.push_back(run_check(def.id, ctx));
    }
    return out;
}

}  // namespace mlfix::checks
