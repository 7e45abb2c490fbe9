#pragma once

// Helpers shared by the check implementations. Internal to the check engine.

#include <string>
#include <string_view>
#include <vector>

#include "mlfix/artifact/catalog.hpp"
#include "mlfix/artifact/codec.hpp"
#include "mlfix/checks/registry.hpp"

namespace mlfix::checks::detail {

using artifact::CheckResult;
using artifact::CheckStatus;

enum class Direction { at_most, at_least };

CheckResult make_result(std::string_view check_id);

/// "metric ≤ t", "metric ≥ t", or "metric == 0" for an at-most zero bound.
std::string condition_text(std::string_view metric, Direction direction, double threshold);

/// Sets status to pass or `on_violation` and fills the condition string.
void apply_condition(CheckResult& result, std::string_view metric, Direction direction, double threshold,
                     CheckStatus on_violation = CheckStatus::fail);

const artifact::TableFrame& require_test(const CheckContext& ctx);
const artifact::Column& require_label(const artifact::TableFrame& frame);
void require_classification(const artifact::TableFrame& frame);

/// Byte keys identifying each row over `columns`, comparable across frames
/// (categorical cells are encoded by value, not by dictionary code).
std::vector<std::string> row_keys(const artifact::TableFrame& frame, const std::vector<std::size_t>& columns);

/// Columns used for duplicate detection: everything except index and identifiers.
std::vector<std::size_t> content_columns(const artifact::DatasetSchema& schema);

/// Codes of two columns re-expressed in one shared dictionary.
struct SharedCodes {
    std::vector<std::int32_t> a;
    std::vector<std::int32_t> b;
};
SharedCodes share_codes(const artifact::Column& a, const artifact::Column& b);
SharedCodes share_codes(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Cramer's V of origin (train/test) against a shared categorical code space.
/// Single-category data yields 0: nothing can drift.
double origin_association(const SharedCodes& codes);

/// Label cells as strings, with nullopt for null labels.
std::vector<std::optional<std::string>> label_strings(const artifact::TableFrame& frame);

std::string fmt(double value);

// Check entry points, one per registry id.
CheckResult percent_of_nulls(const CheckContext& ctx);
CheckResult mixed_nulls(const CheckContext& ctx);
CheckResult mixed_data_types(const CheckContext& ctx);
CheckResult string_mismatch(const CheckContext& ctx);
CheckResult special_characters(const CheckContext& ctx);
CheckResult is_single_value(const CheckContext& ctx);
CheckResult class_imbalance(const CheckContext& ctx);
CheckResult data_duplicates(const CheckContext& ctx);
CheckResult conflicting_labels(const CheckContext& ctx);
CheckResult outlier_sample_detection(const CheckContext& ctx);
CheckResult feature_label_correlation(const CheckContext& ctx);
CheckResult feature_feature_correlation(const CheckContext& ctx);

CheckResult datasets_size_comparison(const CheckContext& ctx);
CheckResult new_label(const CheckContext& ctx);
CheckResult new_category(const CheckContext& ctx);
CheckResult index_leakage(const CheckContext& ctx);
CheckResult train_test_samples_mix(const CheckContext& ctx);
CheckResult label_drift(const CheckContext& ctx);
CheckResult feature_drift(const CheckContext& ctx);
CheckResult multivariate_drift(const CheckContext& ctx);

CheckResult single_dataset_performance(const CheckContext& ctx);
CheckResult train_test_performance(const CheckContext& ctx);
CheckResult confusion_matrix_report(const CheckContext& ctx);
CheckResult roc_report(const CheckContext& ctx);
CheckResult calibration_score(const CheckContext& ctx);
CheckResult simple_model_comparison(const CheckContext& ctx);
CheckResult weak_segments_performance(const CheckContext& ctx);
CheckResult prediction_drift(const CheckContext& ctx);

}  // namespace mlfix::checks::detail
