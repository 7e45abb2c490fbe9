#pragma once

// Multivariate drift via a domain classifier: a shallow Gini tree learns to
// tell train rows from test rows; its holdout AUC measures how separable the
// two splits are. drift_score = max(0, 2 * AUC - 1).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlfix/artifact/table.hpp"

namespace mlfix::checks {

struct DriftClassifierOptions {
    int max_depth = 3;
    std::uint64_t seed = 42;
    double fit_fraction = 0.7;            // stratified per origin
    std::size_t max_rows_per_split = 10000;  // seeded subsample cap per origin
    std::size_t min_samples_leaf = 10;
    std::size_t max_split_categories = 10;   // top categories considered per node
    std::size_t min_total_rows = 20;
};

struct FeatureContribution {
    std::string feature;
    double importance = 0.0;  // share of total Gini gain, sums to 1 over features
};

struct DriftClassifierResult {
    double drift_score = 0.0;
    double auc = 0.5;
    std::vector<FeatureContribution> contributions;  // descending importance
};

/// nullopt when the two frames together hold fewer than `min_total_rows`
/// rows, either frame is empty, or no numeric/categorical feature exists.
/// Deterministic for a given seed.
std::optional<DriftClassifierResult> domain_classifier_drift(const artifact::TableFrame& train,
                                                             const artifact::TableFrame& test,
                                                             const DriftClassifierOptions& options);

}  // namespace mlfix::checks
