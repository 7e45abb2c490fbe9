#include "mlfix/checks/dataset_statistics.hpp"

#include <algorithm>
#include <cmath>

#include "mlfix/checks/statistics.hpp"

namespace mlfix::checks {

using artifact::ColumnKind;
using artifact::ColumnStatistics;
using artifact::DatasetStatistics;
using artifact::TableFrame;

namespace {

artifact::NumericSummary summarize(const std::vector<double>& values) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values) {
        if (!std::isnan(x)) v.push_back(x);
    }
    std::sort(v.begin(), v.end());
    artifact::NumericSummary s;
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.min = v.front();
    s.max = v.back();
    s.q1 = quantile_sorted(v, 0.25);
    s.median = quantile_sorted(v, 0.5);
    s.q3 = quantile_sorted(v, 0.75);
    // Mean of identical values can drift by an ulp; keep the summary ordered.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

std::vector<std::int64_t> code_counts(const artifact::Column& col) {
    std::vector<std::int64_t> counts(col.dictionary.size(), 0);
    for (auto c : col.codes) {
        if (c != artifact::kNullCode) ++counts[c];
    }
    return counts;
}

}  // namespace

DatasetStatistics compute_dataset_statistics(const TableFrame& table, const StatisticsOptions& options) {
    DatasetStatistics stats;
    stats.sample_count = static_cast<std::int64_t>(table.row_count);
    if (table.row_count == 0) return stats;

    const auto n = static_cast<double>(table.row_count);
    const auto label = table.schema.label_index();
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        const auto& col = table.columns[i];
        ColumnStatistics cs;
        cs.name = table.schema.columns[i].name;
        cs.kind = col.kind;
        const auto nulls = col.null_count();
        cs.null_fraction = static_cast<double>(nulls) / n;
        if (col.is_numeric()) {
            std::vector<double> sorted;
            sorted.reserve(col.numbers.size());
            for (double x : col.numbers) {
                if (!std::isnan(x)) sorted.push_back(x);
            }
            std::sort(sorted.begin(), sorted.end());
            cs.distinct_count = static_cast<std::int64_t>(
                std::unique(sorted.begin(), sorted.end()) - sorted.begin());
            if (nulls < table.row_count) cs.numeric_summary = summarize(col.numbers);
        } else {
            const auto counts = code_counts(col);
            cs.distinct_count = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
            const bool is_label = label && *label == i;
            if (col.kind == ColumnKind::categorical && !is_label) {
                std::vector<std::size_t> order;
                for (std::size_t c = 0; c < counts.size(); ++c) {
                    if (counts[c] >= options.min_category_count) order.push_back(c);
                }
                std::sort(order.begin(), order.end(), [&](auto a, auto b) {
                    if (counts[a] != counts[b]) return counts[a] > counts[b];
                    return col.dictionary[a] < col.dictionary[b];
                });
                if (order.size() > options.top_k) order.resize(options.top_k);
                for (auto c : order) cs.top_categories.push_back({col.dictionary[c], counts[c]});
            }
            if (is_label && table.schema.task == artifact::TaskType::classification) {
                std::map<std::string, std::int64_t> dist;
                for (std::size_t c = 0; c < counts.size(); ++c) {
                    if (counts[c] > 0) dist[col.dictionary[c]] = counts[c];
                }
                stats.class_distribution = std::move(dist);
            }
        }
        stats.per_column.push_back(std::move(cs));
    }
    return stats;
}

}  // namespace mlfix::checks
