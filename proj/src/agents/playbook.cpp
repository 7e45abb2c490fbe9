#include "playbook.hpp"

#include <array>

namespace mlfix::agents::detail {
namespace {

constexpr std::array<PlaybookEntry, 40> kEntries{{
    // Canonical clusters.
    {"invalid-split", "stratified-splitting",
     "Fix the data partitioning: recreate the train-test split using stratified sampling on the label so both splits "
     "cover the same classes in matching proportions",
     "The train-test split is invalid: the test labels follow a different distribution and include classes "
     "absent from training, so test metrics do not measure the intended task."},
    {"imbalance-driven-underperformance", "class-imbalance",
     "Rebalance training with class weights or resampling and collect more examples of the minority classes",
     "Severe class imbalance leaves the minority classes underrepresented, which drives the weak performance "
     "observed on them."},
    {"leakage-inflated-evaluation", "train-test-leakage",
     "Deduplicate across splits, re-split on a stable entity key, and re-evaluate the model",
     "Test rows that also occur in training inflate the evaluation, so the train-test performance comparison "
     "cannot be trusted."},
    {"configuration-error", "checkpoint-configuration",
     "Align the checkpoint configuration (class count and label order) with the dataset and retrain or reload "
     "the matching checkpoint",
     "The checkpoint configuration does not match the dataset labels, which explains the failing evaluation "
     "checks."},

    // Analyzer rule findings.
    {"dataset.class_imbalance", "class-imbalance",
     "Rebalance training with class weights or resampling and report macro-averaged metrics", ""},
    {"dataset.high_null_fraction", "missing-values",
     "Impute or drop columns with many missing values using training-split statistics only", ""},
    {"dataset.class_distribution_divergence", "stratified-splitting",
     "Recreate the train-test split using stratified sampling on the label", ""},
    {"checkpoint.zero_parameters", "checkpoint-configuration",
     "Re-export the checkpoint after initialisation; a model with zero parameters is unusable", ""},
    {"checkpoint.config_mismatch", "checkpoint-configuration",
     "Align num_classes and the label order of the checkpoint with the dataset", ""},
    {"checkpoint.missing_docstring", "checkpoint-configuration",
     "Document the checkpoint: architecture, training data and label mapping", ""},
    {"checkpoint.missing", "checkpoint-configuration",
     "Provide checkpoint metadata so the configuration can be validated", ""},

    // Checks.
    {"percent_of_nulls", "missing-values",
     "Impute or drop columns with many missing values using training-split statistics only", ""},
    {"mixed_nulls", "missing-values", "Normalise the different null markers to one representation at ingestion", ""},
    {"mixed_data_types", "missing-values", "Coerce columns with mixed value types to a single type at ingestion", ""},
    {"string_mismatch", "missing-values", "Normalise inconsistent spellings of the same categorical value", ""},
    {"special_characters", "outliers-and-duplicates", "Clean or strip special characters from affected values", ""},
    {"is_single_value", "outliers-and-duplicates", "Drop constant columns; they carry no signal", ""},
    {"class_imbalance", "class-imbalance",
     "Rebalance training with class weights or resampling and report macro-averaged metrics", ""},
    {"data_duplicates", "outliers-and-duplicates", "Deduplicate rows within each split", ""},
    {"conflicting_labels", "label-noise", "Review and relabel samples whose features agree but labels conflict", ""},
    {"outlier_sample_detection", "outliers-and-duplicates",
     "Inspect the most extreme rows and clip, correct or remove them with a recorded rule", ""},
    {"feature_label_correlation", "target-leakage",
     "Check the most predictive feature for target leakage and remove it if it is unavailable at prediction time",
     ""},
    {"feature_feature_correlation", "covariate-drift", "Drop or combine highly correlated features", ""},
    {"datasets_size_comparison", "stratified-splitting", "Enlarge the test split so evaluation is meaningful", ""},
    {"new_label", "stratified-splitting",
     "Collect training data for labels that only appear in test, or remove them from evaluation", ""},
    {"new_category", "covariate-drift",
     "Map categories unseen in training to an explicit unknown bucket and collect examples of them", ""},
    {"index_leakage", "train-test-leakage", "Remove index values shared by train and test and re-split on the entity key",
     ""},
    {"train_test_samples_mix", "train-test-leakage", "Remove test rows that duplicate training rows", ""},
    {"label_drift", "label-shift",
     "Re-split so label proportions match, or re-estimate class priors if the shift is real", ""},
    {"feature_drift", "covariate-drift", "Investigate the drifted features and retrain on data covering the test range",
     ""},
    {"multivariate_drift", "covariate-drift",
     "Find the collection change behind the train-test shift and retrain or reweight accordingly", ""},
    {"single_dataset_performance", "slice-evaluation", "Review overall model performance", ""},
    {"train_test_performance", "slice-evaluation",
     "Reduce overfitting with regularisation or more data after ruling out leakage", ""},
    {"confusion_matrix_report", "class-imbalance", "Improve recall on the classes the model confuses most", ""},
    {"roc_report", "class-imbalance", "Improve separability for the classes with low AUC", ""},
    {"calibration_score", "calibration", "Calibrate predicted probabilities on held-out data", ""},
    {"simple_model_comparison", "slice-evaluation",
     "Revisit features and model choice; the model barely beats a constant baseline", ""},
    {"weak_segments_performance", "slice-evaluation",
     "Investigate the weak segments for under-representation, drift or label errors", ""},
    {"prediction_drift", "covariate-drift", "Investigate why prediction distributions differ between splits", ""},
    {"", "", "Investigate the finding and re-run the checks", ""},
}};

}  // namespace

const PlaybookEntry& playbook(std::string_view key) {
    if (key.substr(0, 7) == "checks.") key.remove_prefix(7);
    for (const auto& e : kEntries) {
        if (e.key == key) return e;
    }
    return kEntries.back();
}

}  // namespace mlfix::agents::detail
