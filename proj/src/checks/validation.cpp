#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "check_support.hpp"
#include "mlfix/checks/drift_classifier.hpp"
#include "mlfix/checks/statistics.hpp"

namespace mlfix::checks::detail {

using artifact::Column;
using artifact::ColumnKind;
using artifact::kNullCode;
using artifact::TableFrame;

namespace {

std::unordered_set<std::string> present_values(const Column& col) {
    std::unordered_set<std::string> out;
    std::vector<bool> used(col.dictionary.size(), false);
    for (auto c : col.codes) {
        if (c != kNullCode) used[c] = true;
    }
    for (std::size_t k = 0; k < used.size(); ++k) {
        if (used[k]) out.insert(col.dictionary[k]);
    }
    return out;
}

// Each feature's drift on [0, 1]: KS for numeric, Cramer's V against origin
// for categorical.
std::vector<std::pair<std::string, double>> feature_drift_scores(const TableFrame& train, const TableFrame& test) {
    std::vector<std::pair<std::string, double>> out;
    for (auto c : train.schema.feature_columns()) {
        const auto& spec = train.schema.columns[c];
        const auto& a = train.columns[c];
        const auto& b = test.column(spec.name);
        if (spec.kind == ColumnKind::numeric) {
            if (auto d = ks_statistic(a.numbers, b.numbers)) out.emplace_back(spec.name, *d);
        } else if (spec.kind == ColumnKind::categorical) {
            out.emplace_back(spec.name, origin_association(share_codes(a, b)));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    return out;
}

}  // namespace

CheckResult datasets_size_comparison(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    if (ctx.train->row_count == 0) throw SkipCheck("train split is empty");
    auto r = make_result("datasets_size_comparison");
    r.metrics["test_train_ratio"] =
        static_cast<double>(test.row_count) / static_cast<double>(ctx.train->row_count);
    r.metrics["train_rows"] = static_cast<double>(ctx.train->row_count);
    r.metrics["test_rows"] = static_cast<double>(test.row_count);
    apply_condition(r, "test_train_ratio", Direction::at_least, ctx.config.threshold(r.check_id));
    r.summary = "Test split holds " + fmt(r.metrics["test_train_ratio"]) + " times as many rows as train";
    return r;
}

CheckResult new_label(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    require_classification(*ctx.train);
    auto r = make_result("new_label");
    const auto known = present_values(*ctx.train->label());
    const auto& label = *test.label();
    const auto seen = present_values(label);
    if (seen.empty()) throw SkipCheck("test split has no labelled rows");
    std::size_t unseen = 0;
    for (const auto& v : seen) unseen += known.count(v) == 0 ? 1 : 0;
    std::size_t unseen_rows = 0;
    for (std::size_t i = 0; i < test.row_count; ++i) {
        if (!label.is_null(i) && known.count(label.text(i)) == 0) ++unseen_rows;
    }
    r.metrics["new_label_ratio"] = static_cast<double>(unseen) / static_cast<double>(seen.size());
    r.metrics["new_label_count"] = static_cast<double>(unseen);
    r.metrics["new_label_row_fraction"] =
        test.row_count == 0 ? 0.0 : static_cast<double>(unseen_rows) / static_cast<double>(test.row_count);
    apply_condition(r, "new_label_ratio", Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = std::to_string(unseen) + " of " + std::to_string(seen.size()) +
                " test labels never appear in train";
    return r;
}

CheckResult new_category(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    auto r = make_result("new_category");
    if (test.row_count == 0) throw SkipCheck("test split is empty");
    const double threshold = ctx.config.threshold(r.check_id);
    double worst = 0.0;
    std::size_t columns = 0;
    std::size_t over = 0;
    for (auto c : ctx.train->schema.feature_columns()) {
        const auto& spec = ctx.train->schema.columns[c];
        if (spec.kind != ColumnKind::categorical) continue;
        ++columns;
        const auto known = present_values(ctx.train->columns[c]);
        const auto& col = test.column(spec.name);
        std::vector<int> is_new(col.dictionary.size(), -1);
        std::size_t rows = 0;
        for (auto code : col.codes) {
            if (code == kNullCode) continue;
            if (is_new[code] < 0) is_new[code] = known.count(col.dictionary[code]) == 0 ? 1 : 0;
            rows += static_cast<std::size_t>(is_new[code]);
        }
        const double fraction = static_cast<double>(rows) / static_cast<double>(test.row_count);
        if (fraction > 0.0) r.details[spec.name] = fraction;
        if (fraction > threshold) ++over;
        worst = std::max(worst, fraction);
    }
    if (columns == 0) throw SkipCheck("no categorical features");
    r.metrics["max_new_category_fraction"] = worst;
    apply_condition(r, "max_new_category_fraction", Direction::at_most, threshold);
    r.summary = std::to_string(over) + " categorical feature(s) with unseen test categories above threshold";
    return r;
}

CheckResult index_leakage(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    const auto idx = ctx.train->schema.index_index();
    if (!idx) throw SkipCheck("no index column declared");
    if (test.row_count == 0) throw SkipCheck("test split is empty");
    auto r = make_result("index_leakage");
    const std::vector<std::size_t> columns{*idx};
    const auto train_keys = row_keys(*ctx.train, columns);
    const auto test_keys = row_keys(test, columns);
    std::unordered_set<std::string_view> seen(train_keys.begin(), train_keys.end());
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < test_keys.size(); ++i) {
        if (!test.columns[*idx].is_null(i) && seen.count(test_keys[i]) > 0) ++overlap;
    }
    r.metrics["index_overlap_fraction"] = static_cast<double>(overlap) / static_cast<double>(test.row_count);
    r.metrics["index_overlap_count"] = static_cast<double>(overlap);
    apply_condition(r, "index_overlap_fraction", Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = std::to_string(overlap) + " test index value(s) also present in train";
    return r;
}

CheckResult train_test_samples_mix(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    if (test.row_count == 0) throw SkipCheck("test split is empty");
    auto r = make_result("train_test_samples_mix");
    const auto columns = content_columns(ctx.train->schema);
    const auto train_keys = row_keys(*ctx.train, columns);
    const auto test_keys = row_keys(test, columns);
    std::unordered_set<std::string_view> seen(train_keys.begin(), train_keys.end());
    std::size_t mixed = 0;
    for (const auto& k : test_keys) mixed += seen.count(k) > 0 ? 1 : 0;
    r.metrics["samples_mix_fraction"] = static_cast<double>(mixed) / static_cast<double>(test.row_count);
    r.metrics["samples_mix_rows"] = static_cast<double>(mixed);
    apply_condition(r, "samples_mix_fraction", Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = std::to_string(mixed) + " test row(s) duplicate a train row";
    return r;
}

CheckResult label_drift(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    const auto& a = require_label(*ctx.train);
    const auto& b = *test.label();
    auto r = make_result("label_drift");
    const double threshold = ctx.config.threshold(r.check_id);
    if (ctx.train->schema.task == artifact::TaskType::classification) {
        const auto codes = share_codes(a, b);
        const bool any_a = std::any_of(codes.a.begin(), codes.a.end(), [](auto c) { return c != kNullCode; });
        const bool any_b = std::any_of(codes.b.begin(), codes.b.end(), [](auto c) { return c != kNullCode; });
        if (!any_a || !any_b) throw SkipCheck("a split has no labelled rows");
        r.metrics["cramers_v"] = origin_association(codes);
        apply_condition(r, "cramers_v", Direction::at_most, threshold);
        r.summary = "Label distribution shift between train and test, Cramer's V " + fmt(r.metrics["cramers_v"]);
    } else {
        auto d = ks_statistic(a.numbers, b.numbers);
        if (!d) throw SkipCheck("a split has no labelled rows");
        r.metrics["ks_statistic"] = *d;
        apply_condition(r, "ks_statistic", Direction::at_most, threshold);
        r.summary = "Label distribution shift between train and test, KS " + fmt(*d);
    }
    return r;
}

CheckResult feature_drift(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    auto r = make_result("feature_drift");
    const double threshold = ctx.config.threshold(r.check_id);
    const auto scores = feature_drift_scores(*ctx.train, test);
    if (scores.empty()) throw SkipCheck("no numeric or categorical feature to compare");
    std::size_t drifted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].second > threshold) ++drifted;
        if (i < 5) r.details[scores[i].first] = scores[i].second;
    }
    r.metrics["drift_score"] = scores.front().second;
    r.metrics["drifted_features"] = static_cast<double>(drifted);
    apply_condition(r, "drift_score", Direction::at_most, threshold);
    r.summary = std::to_string(drifted) + " feature(s) drifted; largest shift in " + scores.front().first;
    return r;
}

CheckResult multivariate_drift(const CheckContext& ctx) {
    const auto& test = require_test(ctx);
    auto r = make_result("multivariate_drift");
    DriftClassifierOptions options;
    options.max_depth = ctx.config.drift_tree_depth;
    options.seed = ctx.config.random_seed;
    options.max_rows_per_split = ctx.config.drift_max_rows;
    auto result = domain_classifier_drift(*ctx.train, test, options);
    if (!result) throw SkipCheck("too few rows or no usable features for a domain classifier");
    r.metrics["drift_score"] = result->drift_score;
    r.metrics["domain_classifier_auc"] = result->auc;
    for (std::size_t i = 0; i < result->contributions.size() && i < 5; ++i) {
        r.details[result->contributions[i].feature] = result->contributions[i].importance;
    }
    apply_condition(r, "drift_score", Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = "A classifier separates train from test rows with AUC " + fmt(result->auc);
    return r;
}

}  // namespace mlfix::checks::detail
