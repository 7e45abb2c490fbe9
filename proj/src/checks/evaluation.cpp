#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "check_support.hpp"
#include "mlfix/checks/statistics.hpp"

namespace mlfix::checks::detail {

using artifact::ColumnKind;
using artifact::kNullCode;
using artifact::PredictionSet;
using artifact::TableFrame;

namespace {

// Per-class and per-segment details are only reported for groups at least
// this large, so rare label values never leave the client.
constexpr std::size_t kMinReportedGroup = 5;
constexpr double kRatioCap = 1e6;

struct EvalSet {
    const TableFrame* frame = nullptr;
    const PredictionSet* predictions = nullptr;
};

EvalSet eval_set(const CheckContext& ctx) {
    require_label(*ctx.train);
    if (ctx.test != nullptr && ctx.test_predictions != nullptr) return {ctx.test, ctx.test_predictions};
    if (ctx.train_predictions != nullptr) return {ctx.train, ctx.train_predictions};
    throw SkipCheck("requires model predictions");
}

bool is_classification(const TableFrame& frame) {
    return frame.schema.task == artifact::TaskType::classification;
}

struct Classified {
    std::vector<std::string> truth;
    std::vector<std::string> predicted;
    std::vector<std::size_t> rows;
};

Classified classified(const EvalSet& e) {
    if (e.predictions->is_regression()) throw SkipCheck("classification task with regression predictions");
    const auto labels = label_strings(*e.frame);
    Classified out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) continue;
        out.truth.push_back(*labels[i]);
        out.predicted.push_back(e.predictions->predicted_labels[i]);
        out.rows.push_back(i);
    }
    if (out.truth.empty()) throw SkipCheck("no labelled rows to evaluate");
    return out;
}

double accuracy_of(const Classified& c) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < c.truth.size(); ++i) hits += c.truth[i] == c.predicted[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(c.truth.size());
}

struct Regressed {
    std::vector<double> truth;
    std::vector<double> predicted;
};

Regressed regressed(const EvalSet& e) {
    if (!e.predictions->is_regression()) throw SkipCheck("regression task without predicted values");
    const auto& label = *e.frame->label();
    Regressed out;
    for (std::size_t i = 0; i < e.frame->row_count; ++i) {
        const double p = e.predictions->predicted_values[i];
        if (label.is_null(i) || !std::isfinite(p)) continue;
        out.truth.push_back(label.numbers[i]);
        out.predicted.push_back(p);
    }
    if (out.truth.empty()) throw SkipCheck("no labelled rows to evaluate");
    return out;
}

double rmse_of(const std::vector<double>& truth, const std::vector<double>& predicted) {
    double ss = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) ss += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

// Coefficient of determination; 0 when the truth is constant.
double r2_of(const Regressed& r) {
    const double mean = std::accumulate(r.truth.begin(), r.truth.end(), 0.0) / static_cast<double>(r.truth.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < r.truth.size(); ++i) {
        ss_res += (r.truth[i] - r.predicted[i]) * (r.truth[i] - r.predicted[i]);
        ss_tot += (r.truth[i] - mean) * (r.truth[i] - mean);
    }
    if (ss_tot == 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

// Accuracy for classification, R^2 for regression.
double score_of(const EvalSet& e) {
    return is_classification(*e.frame) ? accuracy_of(classified(e)) : r2_of(regressed(e));
}

std::map<std::string, std::size_t> class_counts(const std::vector<std::string>& truth) {
    std::map<std::string, std::size_t> out;
    for (const auto& t : truth) ++out[t];
    return out;
}

}  // namespace

CheckResult single_dataset_performance(const CheckContext& ctx) {
    const auto e = eval_set(ctx);
    auto r = make_result("single_dataset_performance");
    const char* dataset = e.frame == ctx.test ? "test" : "train";
    if (is_classification(*e.frame)) {
        const auto c = classified(e);
        r.metrics["accuracy"] = accuracy_of(c);
        r.summary = std::string("Accuracy on ") + dataset + " split " + fmt(r.metrics["accuracy"]);
    } else {
        const auto g = regressed(e);
        r.metrics["r2"] = r2_of(g);
        r.metrics["rmse"] = rmse_of(g.truth, g.predicted);
        r.summary = std::string("R2 on ") + dataset + " split " + fmt(r.metrics["r2"]);
    }
    r.condition = "reported, no condition";
    return r;
}

CheckResult train_test_performance(const CheckContext& ctx) {
    require_label(*ctx.train);
    if (ctx.test == nullptr || ctx.train_predictions == nullptr || ctx.test_predictions == nullptr) {
        throw SkipCheck("requires predictions for both splits");
    }
    auto r = make_result("train_test_performance");
    const double train_score = score_of({ctx.train, ctx.train_predictions});
    const double test_score = score_of({ctx.test, ctx.test_predictions});
    const bool cls = is_classification(*ctx.train);
    const std::string metric = cls ? "accuracy_gap" : "r2_gap";
    r.metrics[metric] = train_score - test_score;
    r.metrics[cls ? "train_accuracy" : "train_r2"] = train_score;
    r.metrics[cls ? "test_accuracy" : "test_r2"] = test_score;
    apply_condition(r, metric, Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = "Train score " + fmt(train_score) + " against test score " + fmt(test_score);
    return r;
}

CheckResult confusion_matrix_report(const CheckContext& ctx) {
    require_classification(*ctx.train);
    const auto c = classified(eval_set(ctx));
    auto r = make_result("confusion_matrix_report");
    const auto m = confusion_matrix(c.truth, c.predicted);
    const auto counts = class_counts(c.truth);
    double recall = 0.0;
    double precision = 0.0;
    std::size_t classes = 0;
    for (std::size_t k = 0; k < m.labels.size(); ++k) {
        const auto it = counts.find(m.labels[k]);
        if (it == counts.end()) continue;  // predicted but never true
        recall += m.recall[k];
        precision += m.precision[k];
        ++classes;
        if (it->second >= kMinReportedGroup) {
            r.details["recall[" + m.labels[k] + "]"] = m.recall[k];
            r.details["precision[" + m.labels[k] + "]"] = m.precision[k];
        }
    }
    r.metrics["accuracy"] = accuracy_of(c);
    r.metrics["macro_recall"] = recall / static_cast<double>(classes);
    r.metrics["macro_precision"] = precision / static_cast<double>(classes);
    r.condition = "reported, no condition";
    r.summary = "Confusion matrix over " + std::to_string(m.labels.size()) + " labels";
    return r;
}

CheckResult roc_report(const CheckContext& ctx) {
    require_classification(*ctx.train);
    const auto e = eval_set(ctx);
    if (!e.predictions->probabilities || !e.predictions->class_order) {
        throw SkipCheck("requires class probabilities");
    }
    const auto c = classified(e);
    const auto& probs = *e.predictions->probabilities;
    const auto& order = *e.predictions->class_order;
    const auto counts = class_counts(c.truth);
    auto r = make_result("roc_report");
    double worst = 1.0;
    std::size_t scored = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        std::vector<double> scores(c.rows.size());
        std::vector<std::uint8_t> positive(c.rows.size());
        for (std::size_t i = 0; i < c.rows.size(); ++i) {
            scores[i] = probs[c.rows[i]][k];
            positive[i] = c.truth[i] == order[k] ? 1 : 0;
        }
        auto auc = auc_roc(scores, positive);
        if (!auc) continue;
        ++scored;
        worst = std::min(worst, *auc);
        const auto it = counts.find(order[k]);
        if (it != counts.end() && it->second >= kMinReportedGroup) r.details["auc[" + order[k] + "]"] = *auc;
    }
    if (scored == 0) throw SkipCheck("no class has both positive and negative rows");
    r.metrics["min_auc"] = worst;
    apply_condition(r, "min_auc", Direction::at_least, ctx.config.threshold(r.check_id));
    r.summary = "Lowest one-vs-rest AUC " + fmt(worst) + " over " + std::to_string(scored) + " classes";
    return r;
}

CheckResult calibration_score(const CheckContext& ctx) {
    require_classification(*ctx.train);
    const auto e = eval_set(ctx);
    if (!e.predictions->probabilities || !e.predictions->class_order) {
        throw SkipCheck("requires class probabilities");
    }
    const auto c = classified(e);
    const auto& order = *e.predictions->class_order;
    std::map<std::string, std::int32_t> position;
    for (std::size_t k = 0; k < order.size(); ++k) position.emplace(order[k], static_cast<std::int32_t>(k));
    std::vector<std::vector<double>> probs;
    std::vector<std::int32_t> truth;
    probs.reserve(c.rows.size());
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        probs.push_back((*e.predictions->probabilities)[c.rows[i]]);
        const auto it = position.find(c.truth[i]);
        truth.push_back(it == position.end() ? -1 : it->second);
    }
    auto ece = expected_calibration_error(probs, truth, ctx.config.ece_bins);
    if (!ece) throw SkipCheck("no labelled rows to evaluate");
    auto r = make_result("calibration_score");
    r.metrics["ece"] = *ece;
    apply_condition(r, "ece", Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = "Expected calibration error " + fmt(*ece) + " over " + std::to_string(ctx.config.ece_bins) + " bins";
    return r;
}

CheckResult simple_model_comparison(const CheckContext& ctx) {
    const auto e = eval_set(ctx);
    auto r = make_result("simple_model_comparison");
    double ratio = 1.0;
    if (is_classification(*ctx.train)) {
        const auto train_labels = label_strings(*ctx.train);
        std::map<std::string, std::size_t> counts;
        for (const auto& l : train_labels) {
            if (l) ++counts[*l];
        }
        if (counts.empty()) throw SkipCheck("train split has no labelled rows");
        // Majority class; ties go to the lexically smallest label.
        auto majority = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
            if (it->second > majority->second) majority = it;
        }
        const auto c = classified(e);
        std::size_t hits = 0;
        for (const auto& t : c.truth) hits += t == majority->first ? 1 : 0;
        const double baseline = static_cast<double>(hits) / static_cast<double>(c.truth.size());
        const double model = accuracy_of(c);
        ratio = baseline > 0.0 ? model / baseline : (model > 0.0 ? kRatioCap : 1.0);
        r.metrics["baseline_accuracy"] = baseline;
        r.metrics["model_accuracy"] = model;
    } else {
        const auto& label = *ctx.train->label();
        double sum = 0.0;
        double n = 0.0;
        for (double v : label.numbers) {
            if (!std::isnan(v)) {
                sum += v;
                n += 1.0;
            }
        }
        if (n == 0.0) throw SkipCheck("train split has no labelled rows");
        const auto g = regressed(e);
        const std::vector<double> constant(g.truth.size(), sum / n);
        const double baseline = rmse_of(g.truth, constant);
        const double model = rmse_of(g.truth, g.predicted);
        ratio = model > 0.0 ? baseline / model : (baseline > 0.0 ? kRatioCap : 1.0);
        r.metrics["baseline_rmse"] = baseline;
        r.metrics["model_rmse"] = model;
    }
    r.metrics["improvement_ratio"] = std::min(ratio, kRatioCap);
    apply_condition(r, "improvement_ratio", Direction::at_least, ctx.config.threshold(r.check_id));
    r.summary = "Model scores " + fmt(r.metrics["improvement_ratio"]) + " times a constant baseline";
    return r;
}

CheckResult weak_segments_performance(const CheckContext& ctx) {
    require_classification(*ctx.train);
    const auto e = eval_set(ctx);
    const auto c = classified(e);
    const auto& frame = *e.frame;
    const double gap = ctx.config.threshold("weak_segments_performance");
    const auto n = c.rows.size();
    const auto min_rows = std::max<std::size_t>(
        kMinReportedGroup, static_cast<std::size_t>(std::ceil(ctx.config.weak_segment_min_fraction * static_cast<double>(n))));

    std::vector<std::uint8_t> correct(n);
    for (std::size_t i = 0; i < n; ++i) correct[i] = c.truth[i] == c.predicted[i] ? 1 : 0;
    const double global = accuracy_of(c);

    struct Segment {
        std::size_t rows = 0;
        std::size_t hits = 0;
    };
    std::map<std::string, Segment> segments;
    auto add = [&](const std::string& name, std::size_t i) {
        auto& s = segments[name];
        ++s.rows;
        s.hits += correct[i];
    };

    for (auto col : frame.schema.feature_columns()) {
        const auto& spec = frame.schema.columns[col];
        const auto& column = frame.columns[col];
        if (spec.kind == ColumnKind::numeric) {
            std::vector<double> values;
            for (auto row : c.rows) {
                if (!std::isnan(column.numbers[row])) values.push_back(column.numbers[row]);
            }
            if (values.size() < 4) continue;
            std::sort(values.begin(), values.end());
            const double q1 = quantile_sorted(values, 0.25);
            const double q2 = quantile_sorted(values, 0.5);
            const double q3 = quantile_sorted(values, 0.75);
            for (std::size_t i = 0; i < n; ++i) {
                const double v = column.numbers[c.rows[i]];
                if (std::isnan(v)) continue;
                const char* bin = v <= q1 ? "[Q1]" : v <= q2 ? "[Q2]" : v <= q3 ? "[Q3]" : "[Q4]";
                add(spec.name + bin, i);
            }
        } else if (spec.kind == ColumnKind::categorical) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto code = column.codes[c.rows[i]];
                if (code != kNullCode) add(spec.name + "=" + column.dictionary[code], i);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) add("class=" + c.truth[i], i);

    auto r = make_result("weak_segments_performance");
    double weak = 0.0;
    double lowest = 1.0;
    std::size_t eligible = 0;
    for (const auto& [name, s] : segments) {
        if (s.rows < min_rows) continue;
        ++eligible;
        const double acc = static_cast<double>(s.hits) / static_cast<double>(s.rows);
        lowest = std::min(lowest, acc);
        if (acc < global - gap) {
            weak += 1.0;
            r.details[name] = acc;
        }
    }
    if (eligible == 0) throw SkipCheck("no segment holds enough rows");
    r.metrics["weak_segment_count"] = weak;
    r.metrics["global_accuracy"] = global;
    r.metrics["min_segment_accuracy"] = lowest;
    r.condition = "segment_accuracy ≥ global_accuracy - " + fmt(gap);
    r.status = weak > 0 ? CheckStatus::fail : CheckStatus::pass;
    r.summary = std::to_string(static_cast<std::size_t>(weak)) + " of " + std::to_string(eligible) +
                " one-dimensional segments underperform (single-feature segments only)";
    return r;
}

CheckResult prediction_drift(const CheckContext& ctx) {
    require_label(*ctx.train);
    if (ctx.test == nullptr || ctx.train_predictions == nullptr || ctx.test_predictions == nullptr) {
        throw SkipCheck("requires predictions for both splits");
    }
    auto r = make_result("prediction_drift");
    const auto& a = *ctx.train_predictions;
    const auto& b = *ctx.test_predictions;
    if (a.size() == 0 || b.size() == 0) throw SkipCheck("a split has no predictions");
    double score = 0.0;
    if (is_classification(*ctx.train)) {
        if (a.is_regression() || b.is_regression()) throw SkipCheck("classification task with regression predictions");
        score = origin_association(share_codes(a.predicted_labels, b.predicted_labels));
    } else {
        if (!a.is_regression() || !b.is_regression()) throw SkipCheck("regression task without predicted values");
        auto d = ks_statistic(a.predicted_values, b.predicted_values);
        if (!d) throw SkipCheck("no finite predictions");
        score = *d;
    }
    r.metrics["prediction_drift_score"] = score;
    apply_condition(r, "prediction_drift_score", Direction::at_most, ctx.config.threshold(r.check_id));
    r.summary = "Prediction distribution shift between train and test " + fmt(score);
    return r;
}

}  // namespace mlfix::checks::detail
