#include "mlfix/artifact/catalog.hpp"

#include <array>
#include <utility>

namespace mlfix::artifact {
namespace {

using C = CheckCategory;

constexpr std::array<CatalogEntry, 28> kCatalog{{
    {"percent_of_nulls", C::data_integrity, "Percent of nulls"},
    {"mixed_nulls", C::data_integrity, "Mixed nulls"},
    {"mixed_data_types", C::data_integrity, "Mixed data types"},
    {"string_mismatch", C::data_integrity, "String mismatch"},
    {"special_characters", C::data_integrity, "Special characters"},
    {"is_single_value", C::data_integrity, "Single value"},
    {"class_imbalance", C::data_integrity, "Class imbalance"},
    {"data_duplicates", C::data_integrity, "Data duplicates"},
    {"conflicting_labels", C::data_integrity, "Conflicting labels"},
    {"outlier_sample_detection", C::data_integrity, "Outlier samples"},
    {"feature_label_correlation", C::data_integrity, "Feature-label correlation"},
    {"feature_feature_correlation", C::data_integrity, "Feature-feature correlation"},

    {"datasets_size_comparison", C::train_test_validation, "Dataset size comparison"},
    {"new_label", C::train_test_validation, "New label"},
    {"new_category", C::train_test_validation, "New category"},
    {"index_leakage", C::train_test_validation, "Index leakage"},
    {"train_test_samples_mix", C::train_test_validation, "Train-test samples mix"},
    {"label_drift", C::train_test_validation, "Label drift"},
    {"feature_drift", C::train_test_validation, "Feature drift"},
    {"multivariate_drift", C::train_test_validation, "Multivariate drift"},

    {"single_dataset_performance", C::model_evaluation, "Single dataset performance"},
    {"train_test_performance", C::model_evaluation, "Train-test performance"},
    {"confusion_matrix_report", C::model_evaluation, "Confusion matrix"},
    {"roc_report", C::model_evaluation, "ROC report"},
    {"calibration_score", C::model_evaluation, "Calibration score"},
    {"simple_model_comparison", C::model_evaluation, "Simple model comparison"},
    {"weak_segments_performance", C::model_evaluation, "Weak segments performance"},
    {"prediction_drift", C::model_evaluation, "Prediction drift"},
}};

constexpr std::array<std::pair<std::string_view, std::string_view>, 12> kMetricNames{{
    {"cramers_v", "Cramer's V"},
    {"ks_statistic", "KS"},
    {"new_label_ratio", "unseen test label ratio"},
    {"max_null_fraction", "max null fraction"},
    {"duplicate_fraction", "duplicate row fraction"},
    {"minority_majority_ratio", "minority/majority class ratio"},
    {"drift_score", "drift score"},
    {"max_drift_score", "max feature drift"},
    {"ece", "ECE"},
    {"min_auc", "min one-vs-rest AUC"},
    {"accuracy_gap", "train-test accuracy gap"},
    {"samples_mix_fraction", "test rows found in train"},
}};

}  // namespace

std::span<const CatalogEntry> check_catalog() { return kCatalog; }

std::optional<CatalogEntry> find_check(std::string_view id) {
    for (const auto& e : kCatalog) {
        if (e.id == id) return e;
    }
    return std::nullopt;
}

std::string_view metric_display_name(std::string_view metric) {
    for (const auto& [name, label] : kMetricNames) {
        if (name == metric) return label;
    }
    return metric;
}

}  // namespace mlfix::artifact
