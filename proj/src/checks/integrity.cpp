#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "check_support.hpp"
#include "mlfix/checks/statistics.hpp"

namespace mlfix::checks::detail {

using artifact::Column;
using artifact::ColumnKind;
using artifact::kNullCode;
using artifact::TableFrame;

namespace {

std::string fold(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(begin, end - begin + 1));
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_string_kind(ColumnKind k) { return k == ColumnKind::categorical || k == ColumnKind::text; }

std::vector<std::int64_t> code_counts(const Column& col) {
    std::vector<std::int64_t> counts(col.dictionary.size(), 0);
    for (auto c : col.codes) {
        if (c != kNullCode) ++counts[c];
    }
    return counts;
}

std::string plural(std::size_t n, std::string_view word) {
    return std::to_string(n) + " " + std::string(word) + (n == 1 ? "" : "s");
}

// Association between two columns on [0, 1], chosen by their kinds.
std::optional<double> association(const Column& a, const Column& b) {
    if (a.is_numeric() && b.is_numeric()) {
        auto r = pearson(a.numbers, b.numbers);
        if (!r) return std::nullopt;
        return std::abs(*r);
    }
    if (a.is_numeric()) return correlation_ratio(a.numbers, b.codes);
    if (b.is_numeric()) return correlation_ratio(b.numbers, a.codes);
    return cramers_v(a.codes, b.codes);
}

bool associable(ColumnKind k) { return k == ColumnKind::numeric || k == ColumnKind::categorical; }

}  // namespace

CheckResult percent_of_nulls(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    auto r = make_result("percent_of_nulls");
    if (t.row_count == 0) throw SkipCheck("dataset is empty");
    const double threshold = ctx.config.threshold(r.check_id);
    double worst = 0.0;
    std::size_t over = 0;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const double fraction = static_cast<double>(t.columns[c].null_count()) / static_cast<double>(t.row_count);
        if (fraction > 0.0) r.details[t.schema.columns[c].name] = fraction;
        if (fraction > threshold) ++over;
        worst = std::max(worst, fraction);
    }
    r.metrics["max_null_fraction"] = worst;
    apply_condition(r, "max_null_fraction", Direction::at_most, threshold, CheckStatus::warn);
    r.summary = plural(over, "column") + " above the null fraction threshold";
    return r;
}

CheckResult mixed_nulls(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    auto r = make_result("mixed_nulls");
    const double threshold = ctx.config.threshold(r.check_id);
    double worst = 0.0;
    std::size_t mixed = 0;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        std::set<std::string> forms;
        for (const auto& [token, count] : t.columns[c].null_tokens) {
            if (count > 0) forms.insert(fold(token));
        }
        const auto n = static_cast<double>(forms.size());
        if (n > 0) r.details[t.schema.columns[c].name] = n;
        if (n > threshold) ++mixed;
        worst = std::max(worst, n);
    }
    r.metrics["max_null_forms"] = worst;
    apply_condition(r, "max_null_forms", Direction::at_most, threshold, CheckStatus::warn);
    r.summary = plural(mixed, "column") + " mixing several null representations";
    return r;
}

CheckResult mixed_data_types(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    auto r = make_result("mixed_data_types");
    const double threshold = ctx.config.threshold(r.check_id);
    std::size_t flagged = 0;
    double worst = 0.0;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto& col = t.columns[c];
        const auto kind = t.schema.columns[c].kind;
        double numbers = 0.0;
        double strings = 0.0;
        if (kind == ColumnKind::numeric) {
            numbers = static_cast<double>(col.size() - col.null_count());
            strings = static_cast<double>(col.unparsed_numeric);
        } else if (is_string_kind(kind)) {
            const auto counts = code_counts(col);
            for (std::size_t k = 0; k < counts.size(); ++k) {
                (artifact::parse_number(col.dictionary[k]) ? numbers : strings) += static_cast<double>(counts[k]);
            }
        } else {
            continue;
        }
        const double total = numbers + strings;
        if (total == 0.0) continue;
        const double minority = std::min(numbers, strings) / total;
        if (minority > 0.0 && minority < threshold) {
            ++flagged;
            r.details[t.schema.columns[c].name] = minority;
            worst = std::max(worst, minority);
        }
    }
    r.metrics["columns_with_rare_type"] = static_cast<double>(flagged);
    r.metrics["max_rare_type_fraction"] = worst;
    r.condition = "minority_type_fraction not in (0, " + fmt(threshold) + ")";
    r.status = flagged > 0 ? CheckStatus::warn : CheckStatus::pass;
    r.summary = plural(flagged, "column") + " holding a rare mix of numbers and strings";
    return r;
}

CheckResult string_mismatch(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    auto r = make_result("string_mismatch");
    const double threshold = ctx.config.threshold(r.check_id);
    double total = 0.0;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (!is_string_kind(t.schema.columns[c].kind)) continue;
        const auto& col = t.columns[c];
        const auto counts = code_counts(col);
        std::map<std::string, int> variants;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] > 0) ++variants[fold(col.dictionary[k])];
        }
        double groups = 0.0;
        for (const auto& [base, n] : variants) groups += n > 1 ? 1.0 : 0.0;
        if (groups > 0) r.details[t.schema.columns[c].name] = groups;
        total += groups;
    }
    r.metrics["variant_groups"] = total;
    apply_condition(r, "variant_groups", Direction::at_most, threshold, CheckStatus::warn);
    r.summary = plural(static_cast<std::size_t>(total), "value group") + " spelled in several case or spacing variants";
    return r;
}

CheckResult special_characters(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    auto r = make_result("special_characters");
    const double threshold = ctx.config.threshold(r.check_id);
    double worst = 0.0;
    std::size_t over = 0;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (!is_string_kind(t.schema.columns[c].kind)) continue;
        const auto& col = t.columns[c];
        const auto counts = code_counts(col);
        double special = 0.0;
        double present = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            present += static_cast<double>(counts[k]);
            const auto& s = col.dictionary[k];
            const bool has_alnum = std::any_of(s.begin(), s.end(), [](char ch) {
                return std::isalnum(static_cast<unsigned char>(ch)) != 0 || static_cast<unsigned char>(ch) >= 0x80;
            });
            if (!has_alnum) special += static_cast<double>(counts[k]);
        }
        if (present == 0.0) continue;
        const double fraction = special / present;
        if (fraction > 0.0) r.details[t.schema.columns[c].name] = fraction;
        if (fraction > threshold) ++over;
        worst = std::max(worst, fraction);
    }
    r.metrics["max_special_fraction"] = worst;
    apply_condition(r, "max_special_fraction", Direction::at_most, threshold, CheckStatus::warn);
    r.summary = plural(over, "column") + " with values made only of special characters";
    return r;
}

CheckResult is_single_value(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    auto r = make_result("is_single_value");
    const double threshold = ctx.config.threshold(r.check_id);
    double count = 0.0;
    for (auto c : t.schema.feature_columns()) {
        const auto& col = t.columns[c];
        std::size_t distinct = 0;
        if (col.is_numeric()) {
            std::unordered_set<double> seen;
            for (double v : col.numbers) {
                if (!std::isnan(v)) seen.insert(v == 0.0 ? 0.0 : v);
                if (seen.size() > 1) break;
            }
            distinct = seen.size();
        } else {
            for (auto n : code_counts(col)) distinct += n > 0 ? 1 : 0;
        }
        if (distinct == 1) {
            count += 1.0;
            r.details[t.schema.columns[c].name] = 1.0;
        }
    }
    r.metrics["single_value_columns"] = count;
    apply_condition(r, "single_value_columns", Direction::at_most, threshold, CheckStatus::warn);
    r.summary = plural(static_cast<std::size_t>(count), "feature") + " holding a single distinct value";
    return r;
}

CheckResult class_imbalance(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    require_classification(t);
    auto r = make_result("class_imbalance");
    const auto counts = code_counts(*t.label());
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::int64_t total = 0;
    std::size_t classes = 0;
    for (auto n : counts) {
        if (n == 0) continue;
        lo = classes == 0 ? n : std::min(lo, n);
        hi = std::max(hi, n);
        total += n;
        ++classes;
    }
    if (classes < 2) throw SkipCheck("fewer than two label classes present");
    r.metrics["minority_majority_ratio"] = static_cast<double>(lo) / static_cast<double>(hi);
    r.metrics["minority_share"] = static_cast<double>(lo) / static_cast<double>(total);
    r.metrics["class_count"] = static_cast<double>(classes);
    apply_condition(r, "minority_majority_ratio", Direction::at_least, ctx.config.threshold(r.check_id));
    r.summary = "Smallest class holds " + fmt(r.metrics["minority_majority_ratio"]) + " of the largest class";
    return r;
}

CheckResult data_duplicates(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    if (t.row_count == 0) throw SkipCheck("dataset is empty");
    auto r = make_result("data_duplicates");
    const double threshold = ctx.config.threshold(r.check_id);
    const auto keys = row_keys(t, content_columns(t.schema));
    std::unordered_set<std::string_view> seen;
    seen.reserve(keys.size());
    std::size_t duplicates = 0;
    for (const auto& k : keys) {
        if (!seen.insert(k).second) ++duplicates;
    }
    const double fraction = static_cast<double>(duplicates) / static_cast<double>(t.row_count);
    r.metrics["duplicate_fraction"] = fraction;
    r.metrics["duplicate_rows"] = static_cast<double>(duplicates);
    // Repeats over features alone also count rows whose labels disagree.
    const auto features = t.schema.feature_columns();
    if (!features.empty()) {
        const auto feature_keys = row_keys(t, features);
        std::unordered_set<std::string_view> feature_seen;
        feature_seen.reserve(feature_keys.size());
        std::size_t repeats = 0;
        for (const auto& k : feature_keys) {
            if (!feature_seen.insert(k).second) ++repeats;
        }
        r.metrics["feature_duplicate_rows"] = static_cast<double>(repeats);
    }
    r.condition = condition_text("duplicate_fraction", Direction::at_most, threshold);
    if (fraction > threshold) {
        r.status = CheckStatus::fail;
    } else if (fraction > 0.0) {
        r.status = CheckStatus::warn;
    }
    r.summary = plural(duplicates, "row") + " repeat an earlier row";
    return r;
}

CheckResult conflicting_labels(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    const auto& label = require_label(t);
    auto r = make_result("conflicting_labels");
    const auto features = t.schema.feature_columns();
    if (features.empty()) throw SkipCheck("no feature columns");
    const auto keys = row_keys(t, features);
    const auto labels = label_strings(t);

    struct Group {
        std::optional<std::string> first;
        bool conflict = false;
        std::size_t rows = 0;
    };
    std::unordered_map<std::string_view, Group> groups;
    groups.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (label.is_null(i)) continue;
        auto& g = groups[keys[i]];
        ++g.rows;
        if (!g.first) {
            g.first = labels[i];
        } else if (*g.first != *labels[i]) {
            g.conflict = true;
        }
    }
    double conflicting = 0.0;
    double rows = 0.0;
    for (const auto& [key, g] : groups) {
        if (!g.conflict) continue;
        conflicting += 1.0;
        rows += static_cast<double>(g.rows);
    }
    r.metrics["conflicting_groups"] = conflicting;
    r.metrics["conflicting_rows"] = rows;
    apply_condition(r, "conflicting_groups", Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = plural(static_cast<std::size_t>(conflicting), "feature vector") + " carry more than one label";
    return r;
}

CheckResult outlier_sample_detection(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    if (t.row_count == 0) throw SkipCheck("dataset is empty");
    auto r = make_result("outlier_sample_detection");
    auto scores = robust_outlier_scores(t, ctx.config.outlier_z_cap);
    if (!scores) throw SkipCheck("no numeric feature columns");
    std::size_t outliers = 0;
    double worst = 0.0;
    for (double s : *scores) {
        if (s > ctx.config.outlier_score_threshold) ++outliers;
        worst = std::max(worst, s);
    }
    r.metrics["outlier_fraction"] = static_cast<double>(outliers) / static_cast<double>(t.row_count);
    r.metrics["outlier_rows"] = static_cast<double>(outliers);
    r.metrics["max_outlier_score"] = worst;
    apply_condition(r, "outlier_fraction", Direction::at_most, ctx.config.threshold(r.check_id), CheckStatus::warn);
    r.summary = plural(outliers, "row") + " with a robust z-score above " + fmt(ctx.config.outlier_score_threshold);
    return r;
}

CheckResult feature_label_correlation(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    const auto& label = require_label(t);
    auto r = make_result("feature_label_correlation");
    const double threshold = ctx.config.threshold(r.check_id);
    double worst = 0.0;
    std::size_t scored = 0;
    std::size_t over = 0;
    for (auto c : t.schema.feature_columns()) {
        if (!associable(t.schema.columns[c].kind)) continue;
        auto value = association(t.columns[c], label);
        if (!value) continue;
        ++scored;
        r.details[t.schema.columns[c].name] = *value;
        if (*value > threshold) ++over;
        worst = std::max(worst, *value);
    }
    if (scored == 0) throw SkipCheck("no feature with a measurable association to the label");
    r.metrics["max_feature_label_correlation"] = worst;
    apply_condition(r, "max_feature_label_correlation", Direction::at_most, threshold);
    r.summary = plural(over, "feature") + " predicting the label on its own";
    return r;
}

CheckResult feature_feature_correlation(const CheckContext& ctx) {
    const auto& t = *ctx.train;
    auto r = make_result("feature_feature_correlation");
    const double threshold = ctx.config.threshold(r.check_id);
    std::vector<std::size_t> features;
    for (auto c : t.schema.feature_columns()) {
        if (associable(t.schema.columns[c].kind)) features.push_back(c);
    }
    if (features.size() < 2) throw SkipCheck("fewer than two numeric or categorical features");
    double worst = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t j = i + 1; j < features.size(); ++j) {
            auto value = association(t.columns[features[i]], t.columns[features[j]]);
            if (!value) continue;
            worst = std::max(worst, *value);
            if (*value > threshold) {
                pairs += 1.0;
                r.details[t.schema.columns[features[i]].name + "|" + t.schema.columns[features[j]].name] = *value;
            }
        }
    }
    r.metrics["correlated_pairs"] = pairs;
    r.metrics["max_pair_correlation"] = worst;
    r.condition = condition_text("pair_correlation", Direction::at_most, threshold);
    r.status = pairs > 0 ? CheckStatus::warn : CheckStatus::pass;
    r.summary = plural(static_cast<std::size_t>(pairs), "feature pair") + " above the correlation threshold";
    return r;
}

}  // namespace mlfix::checks::detail
