#include "mlfix/checks/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace mlfix::checks {
namespace {

using artifact::kNullCode;

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

std::vector<double> non_null(std::span<const double> values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (!std::isnan(v)) out.push_back(v);
    }
    return out;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

}  // namespace

ContingencyTable::ContingencyTable(std::initializer_list<std::initializer_list<double>> table) {
    rows = table.size();
    cols = rows ? table.begin()->size() : 0;
    for (const auto& row : table) {
        if (row.size() != cols) throw std::invalid_argument("ragged contingency table");
        counts.insert(counts.end(), row.begin(), row.end());
    }
}

double chi_square(const ContingencyTable& table) {
    if (table.rows == 0 || table.cols == 0) throw DegenerateInput("empty contingency table");
    std::vector<double> row_sum(table.rows, 0.0);
    std::vector<double> col_sum(table.cols, 0.0);
    double n = 0.0;
    for (std::size_t r = 0; r < table.rows; ++r) {
        for (std::size_t c = 0; c < table.cols; ++c) {
            const double v = table.at(r, c);
            if (!(v >= 0.0) || !std::isfinite(v)) throw DegenerateInput("counts must be finite and non-negative");
            row_sum[r] += v;
            col_sum[c] += v;
            n += v;
        }
    }
    if (n <= 0.0) throw DegenerateInput("contingency table total is zero");
    for (double s : row_sum) {
        if (s == 0.0) throw DegenerateInput("degenerate margin: all-zero row");
    }
    for (double s : col_sum) {
        if (s == 0.0) throw DegenerateInput("degenerate margin: all-zero column");
    }
    double chi = 0.0;
    for (std::size_t r = 0; r < table.rows; ++r) {
        for (std::size_t c = 0; c < table.cols; ++c) {
            const double expected = row_sum[r] * col_sum[c] / n;
            const double d = table.at(r, c) - expected;
            chi += d * d / expected;
        }
    }
    return chi;
}

double cramers_v(const ContingencyTable& table) {
    if (table.rows < 2 || table.cols < 2) throw DegenerateInput("Cramer's V needs at least a 2x2 table");
    const double chi = chi_square(table);
    const double n = std::accumulate(table.counts.begin(), table.counts.end(), 0.0);
    const double k = static_cast<double>(std::min(table.rows, table.cols) - 1);
    return clamp_unit(std::sqrt(chi / (n * k)));
}

std::optional<double> cramers_v(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cramers_v: length mismatch");
    // Dense re-coding of the observed categories keeps the table free of empty margins.
    std::unordered_map<std::int32_t, std::size_t> ra;
    std::unordered_map<std::int32_t, std::size_t> rb;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == kNullCode || b[i] == kNullCode) continue;
        auto ia = ra.try_emplace(a[i], ra.size()).first->second;
        auto ib = rb.try_emplace(b[i], rb.size()).first->second;
        pairs.emplace_back(ia, ib);
    }
    if (ra.size() < 2 || rb.size() < 2) return std::nullopt;
    ContingencyTable table(ra.size(), rb.size());
    for (auto [i, j] : pairs) table.at(i, j) += 1.0;
    return cramers_v(table);
}

std::optional<double> ks_statistic(std::span<const double> a, std::span<const double> b) {
    auto x = non_null(a);
    auto y = non_null(b);
    if (x.empty() || y.empty()) return std::nullopt;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    // Advance past every copy of the next smallest value, then compare the
    // two ECDFs at that value; the supremum is attained at a sample point.
    while (i < x.size() || j < y.size()) {
        double v;
        if (j >= y.size() || (i < x.size() && x[i] <= y[j])) v = x[i];
        else v = y[j];
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

std::optional<double> correlation_ratio(std::span<const double> values, std::span<const std::int32_t> groups) {
    if (values.size() != groups.size()) throw std::invalid_argument("correlation_ratio: length mismatch");
    std::map<std::int32_t, std::pair<double, double>> acc;  // group -> (count, sum)
    double n = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i]) || groups[i] == kNullCode) continue;
        auto& g = acc[groups[i]];
        g.first += 1.0;
        g.second += values[i];
        n += 1.0;
        total += values[i];
    }
    if (acc.size() < 2) return std::nullopt;
    const double mean = total / n;
    double ss_total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i]) || groups[i] == kNullCode) continue;
        const double d = values[i] - mean;
        ss_total += d * d;
    }
    if (ss_total == 0.0) return 0.0;
    double ss_between = 0.0;
    for (const auto& [g, cs] : acc) {
        const double d = cs.second / cs.first - mean;
        ss_between += cs.first * d * d;
    }
    return clamp_unit(std::sqrt(ss_between / ss_total));
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
    double n = 0.0;
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) continue;
        n += 1.0;
        sa += a[i];
        sb += b[i];
    }
    if (n < 2.0) return std::nullopt;
    const double ma = sa / n;
    const double mb = sb / n;
    double cov = 0.0;
    double va = 0.0;
    double vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) continue;
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::vector<double> robust_z_scores(std::span<const double> column, double z_cap) {
    std::vector<double> scores(column.size(), 0.0);
    auto present = non_null(column);
    if (present.empty()) return scores;
    const double median = median_of(present);
    for (double& v : present) v = std::abs(v - median);
    const double mad = median_of(std::move(present));
    for (std::size_t i = 0; i < column.size(); ++i) {
        const double v = column[i];
        if (std::isnan(v)) continue;
        if (mad == 0.0) scores[i] = v == median ? 0.0 : z_cap;
        else scores[i] = std::abs(v - median) / (1.4826 * mad);
    }
    return scores;
}

std::optional<std::vector<double>> robust_outlier_scores(const artifact::TableFrame& table, double z_cap) {
    std::vector<double> row_scores(table.row_count, 0.0);
    bool any = false;
    for (auto idx : table.schema.feature_columns()) {
        const auto& col = table.columns[idx];
        if (!col.is_numeric()) continue;
        any = true;
        auto z = robust_z_scores(col.numbers, z_cap);
        for (std::size_t r = 0; r < z.size(); ++r) row_scores[r] = std::max(row_scores[r], z[r]);
    }
    if (!any) return std::nullopt;
    return row_scores;
}

std::optional<double> auc_roc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
    if (scores.size() != positive.size()) throw std::invalid_argument("auc_roc: length mismatch");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto l, auto r) { return scores[l] < scores[r]; });
    double rank_sum_pos = 0.0;
    double n_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (positive[order[k]]) {
                rank_sum_pos += midrank;
                n_pos += 1.0;
            }
        }
        i = j;
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;
    return clamp_unit((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg));
}

std::optional<double> expected_calibration_error(const std::vector<std::vector<double>>& probabilities,
                                                 std::span<const std::int32_t> true_class, int bins) {
    if (bins < 2) throw std::invalid_argument("ece: bins must be >= 2");
    if (probabilities.size() != true_class.size()) throw std::invalid_argument("ece: length mismatch");
    if (probabilities.empty()) return std::nullopt;
    const double nb = static_cast<double>(bins);
    std::vector<double> count(bins, 0.0);
    std::vector<double> correct(bins, 0.0);
    std::vector<double> confidence(bins, 0.0);
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const auto& row = probabilities[i];
        if (row.empty()) throw std::invalid_argument("ece: empty probability row");
        const auto best = std::max_element(row.begin(), row.end());
        const double conf = *best;
        const auto predicted = static_cast<std::int32_t>(best - row.begin());
        auto b = static_cast<int>(std::floor(conf * nb));
        b = std::clamp(b, 0, bins - 1);
        // Settle floating-point edge cases against the bin bounds themselves.
        while (b > 0 && conf < b / nb) --b;
        while (b + 1 < bins && conf >= (b + 1) / nb) ++b;
        count[b] += 1.0;
        correct[b] += predicted == true_class[i] ? 1.0 : 0.0;
        confidence[b] += conf;
    }
    const double n = static_cast<double>(probabilities.size());
    double ece = 0.0;
    for (int b = 0; b < bins; ++b) {
        if (count[b] == 0.0) continue;
        ece += (count[b] / n) * std::abs(correct[b] / count[b] - confidence[b] / count[b]);
    }
    return clamp_unit(ece);
}

ConfusionMatrix confusion_matrix(std::span<const std::string> truth, std::span<const std::string> predicted) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("confusion_matrix: length mismatch");
    std::map<std::string, std::size_t> index;
    for (const auto& t : truth) index.emplace(t, 0);
    for (const auto& p : predicted) index.emplace(p, 0);
    ConfusionMatrix cm;
    for (auto& [label, i] : index) {
        i = cm.labels.size();
        cm.labels.push_back(label);
    }
    const std::size_t k = cm.labels.size();
    cm.counts.assign(k * k, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++cm.counts[index[truth[i]] * k + index[predicted[i]]];
    }
    cm.precision.assign(k, 0.0);
    cm.recall.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t row = 0;
        std::int64_t col = 0;
        for (std::size_t o = 0; o < k; ++o) {
            row += cm.at(c, o);
            col += cm.at(o, c);
        }
        const auto tp = static_cast<double>(cm.at(c, c));
        cm.recall[c] = row > 0 ? tp / static_cast<double>(row) : 0.0;
        cm.precision[c] = col > 0 ? tp / static_cast<double>(col) : 0.0;
    }
    return cm;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty range");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace mlfix::checks
