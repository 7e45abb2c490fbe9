#pragma once

// Statistics behind the diagnostic checks. Conventions:
//   * numeric inputs use NaN for missing values; categorical inputs are
//     dictionary codes with artifact::kNullCode for missing values;
//   * missing values are dropped pairwise before computing anything;
//   * std::nullopt means "precondition not met" and maps to a skipped check,
//     never to a failure.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlfix/artifact/table.hpp"

namespace mlfix::checks {

class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Row-major r x c table of non-negative counts.
struct ContingencyTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> counts;

    ContingencyTable() = default;
    ContingencyTable(std::size_t r, std::size_t c) : rows(r), cols(c), counts(r * c, 0.0) {}
    ContingencyTable(std::initializer_list<std::initializer_list<double>> table);

    double& at(std::size_t r, std::size_t c) { return counts[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }
};

/// Pearson chi-square statistic. Throws DegenerateInput for negative counts,
/// an empty table, or an all-zero row or column.
double chi_square(const ContingencyTable& table);

/// Uncorrected Cramer's V of a table. Throws like chi_square and when fewer
/// than two rows or columns exist.
double cramers_v(const ContingencyTable& table);

/// Cramer's V between two categorical vectors; categories that do not occur
/// after null removal are ignored. nullopt when either side has fewer than
/// two observed categories.
std::optional<double> cramers_v(std::span<const std::int32_t> a, std::span<const std::int32_t> b);

/// Two-sample Kolmogorov-Smirnov D, evaluated exactly at every sample point.
std::optional<double> ks_statistic(std::span<const double> a, std::span<const double> b);

/// Correlation ratio (eta) of a numeric variable given categorical groups.
std::optional<double> correlation_ratio(std::span<const double> values, std::span<const std::int32_t> groups);

/// Sample Pearson correlation; nullopt for fewer than two pairs or zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

/// |x - median| / (1.4826 * MAD) per cell; 0 for nulls. When MAD is zero,
/// median-equal cells score 0 and every other cell scores `z_cap`.
std::vector<double> robust_z_scores(std::span<const double> column, double z_cap);

/// Row score = max robust z over numeric feature columns. nullopt when the
/// table has no numeric feature.
std::optional<std::vector<double>> robust_outlier_scores(const artifact::TableFrame& table, double z_cap);

/// ROC AUC in Mann-Whitney rank form with midranks for ties. `positive`
/// flags the positive class. nullopt unless both classes are present.
std::optional<double> auc_roc(std::span<const double> scores, std::span<const std::uint8_t> positive);

/// ECE over `bins` equal-width confidence bins [k/bins, (k+1)/bins), the last
/// bin closed. `true_class` indexes probability columns; -1 counts as wrong.
/// nullopt for empty input.
std::optional<double> expected_calibration_error(const std::vector<std::vector<double>>& probabilities,
                                                 std::span<const std::int32_t> true_class, int bins);

struct ConfusionMatrix {
    std::vector<std::string> labels;  // sorted union of truth and predictions
    std::vector<std::int64_t> counts; // row = truth, column = prediction
    std::vector<double> precision;
    std::vector<double> recall;

    std::int64_t at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * labels.size() + predicted];
    }
};

/// Throws std::invalid_argument when lengths differ.
ConfusionMatrix confusion_matrix(std::span<const std::string> truth, std::span<const std::string> predicted);

/// Linear-interpolated quantile (type 7) of an ascending, non-empty range.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace mlfix::checks
