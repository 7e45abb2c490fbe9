#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "frames.hpp"
#include "mlfix/checks/dataset_statistics.hpp"
#include "mlfix/checks/drift_classifier.hpp"
#include "mlfix/checks/registry.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

namespace mlfix::checks {
namespace {

using artifact::CheckCategory;
using artifact::CheckStatus;
using artifact::ColumnKind;
using artifact::DatasetRef;
using artifact::PredictionSet;
using artifact::TableFrame;
using testing::make_frame;
using testing::make_schema;

CheckContext context(const TableFrame& train, const TableFrame* test = nullptr) {
    CheckContext ctx;
    ctx.train = &train;
    ctx.test = test;
    return ctx;
}

artifact::DatasetSchema xy_schema() {
    return make_schema({{"x", ColumnKind::numeric}, {"c", ColumnKind::categorical}, {"y", ColumnKind::categorical}},
                       "y");
}

TableFrame clean_frame(std::size_t n = 200, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    testing::Rows rows;
    for (std::size_t i = 0; i < n; ++i) {
        const auto cls = i % 2 == 0 ? "p" : "q";
        rows.push_back({std::to_string(static_cast<double>(rng() % 10000) / 100.0), "k" + std::to_string(i % 3), cls});
    }
    return make_frame(xy_schema(), rows);
}

// -- dataset statistics -----------------------------------------------------

TEST(DatasetStatistics, EmptyTable) {
    const auto t = make_frame(make_schema({{"x", ColumnKind::numeric}}), {});
    const auto s = compute_dataset_statistics(t);
    EXPECT_EQ(s.sample_count, 0);
}

TEST(DatasetStatistics, NumericSummaryWithNull) {
    const auto t = make_frame(make_schema({{"x", ColumnKind::numeric}}), {{"1"}, {"2"}, {"3"}, {""}});
    const auto s = compute_dataset_statistics(t);
    ASSERT_EQ(s.per_column.size(), 1u);
    EXPECT_DOUBLE_EQ(s.per_column[0].null_fraction, 0.25);
    EXPECT_DOUBLE_EQ(s.per_column[0].numeric_summary->mean, 2.0);
    EXPECT_DOUBLE_EQ(s.per_column[0].numeric_summary->median, 2.0);
}

TEST(DatasetStatistics, ClassDistribution) {
    const auto t = make_frame(make_schema({{"y", ColumnKind::categorical}}, "y"), {{"a"}, {"a"}, {"b"}, {"a"}});
    const auto s = compute_dataset_statistics(t);
    ASSERT_TRUE(s.class_distribution.has_value());
    EXPECT_EQ(*s.class_distribution, (std::map<std::string, std::int64_t>{{"a", 3}, {"b", 1}}));
}

TEST(DatasetStatistics, RareCategoriesNeverReported) {
    testing::Rows rows;
    for (int i = 0; i < 20; ++i) rows.push_back({"common", "t" + std::to_string(i)});
    rows.push_back({"SECRET-VALUE-123", "SECRET-TEXT-456"});
    const auto t = make_frame(make_schema({{"c", ColumnKind::categorical}, {"note", ColumnKind::text}}), rows);
    const auto s = compute_dataset_statistics(t);
    for (const auto& col : s.per_column) {
        for (const auto& cat : col.top_categories) {
            EXPECT_GE(cat.count, 5);
            EXPECT_EQ(cat.value.find("SECRET"), std::string::npos);
        }
    }
    EXPECT_TRUE(s.per_column[1].top_categories.empty());
}

// -- registry -----------------------------------------------------------------

TEST(Registry, CoversCatalogInOrder) {
    const auto reg = check_registry();
    ASSERT_EQ(reg.size(), 28u);
    EXPECT_EQ(reg.front().id, "percent_of_nulls");
    EXPECT_EQ(reg.back().id, "prediction_drift");
    EXPECT_THROW(find_definition("bogus"), RegistryError);
    EXPECT_THROW(run_check("bogus", CheckContext{}), RegistryError);
}

TEST(Registry, LabelDriftDefaultThresholdIs015) {
    CheckConfig config;
    EXPECT_DOUBLE_EQ(config.threshold("label_drift"), 0.15);
    EXPECT_THROW(config.threshold("single_dataset_performance"), RegistryError);
}

TEST(CheckConfig, ValidationAndJson) {
    auto c = CheckConfig::from_json({{"thresholds", {{"label_drift", 0.2}}}, {"ece_bins", 15}});
    EXPECT_DOUBLE_EQ(c.threshold("label_drift"), 0.2);
    EXPECT_EQ(c.ece_bins, 15);
    EXPECT_THROW(CheckConfig::from_json({{"ece_bins", 1}}), ConfigError);
    EXPECT_THROW(CheckConfig::from_json({{"thresholds", {{"label_drift", 3.0}}}}), ConfigError);
    EXPECT_THROW(CheckConfig::from_json({{"thresholds", {{"nope", 0.1}}}}), ConfigError);
    EXPECT_THROW(CheckConfig::from_json({{"mystery", 1}}), ConfigError);
}

TEST(RunCheck, InvalidContextBecomesError) {
    const auto train = clean_frame();
    const auto other = make_frame(make_schema({{"z", ColumnKind::numeric}}), {{"1"}});
    const auto ctx = context(train, &other);
    const auto r = run_check("label_drift", ctx);
    EXPECT_EQ(r.status, CheckStatus::error);
    EXPECT_FALSE(r.summary.empty());
}

TEST(RunSuite, CleanTablePassesIntegrity) {
    const auto t = clean_frame();
    const auto results = run_suite(CheckCategory::data_integrity, context(t));
    ASSERT_EQ(results.size(), 12u);
    for (const auto& r : results) {
        EXPECT_TRUE(r.status == CheckStatus::pass || r.status == CheckStatus::skipped)
            << r.check_id << ": " << r.summary;
        EXPECT_EQ(r.category, CheckCategory::data_integrity);
    }
}

TEST(RunSuite, EvaluationWithoutPredictionsIsSkipped) {
    const auto t = clean_frame();
    for (const auto& r : run_suite(CheckCategory::model_evaluation, context(t, &t))) {
        EXPECT_EQ(r.status, CheckStatus::skipped) << r.check_id;
    }
}

TEST(RunSuite, ValidationWithoutTestIsSkipped) {
    const auto t = clean_frame();
    for (const auto& r : run_suite(CheckCategory::train_test_validation, context(t))) {
        EXPECT_EQ(r.status, CheckStatus::skipped) << r.check_id;
    }
}

TEST(RunSuite, DeterministicAcrossRuns) {
    const auto s = testing::numeric_scenario(400, 300, 4, 0.7, 5);
    const auto train = make_frame(s.schema, s.train);
    const auto test = make_frame(s.schema, s.test);
    for (auto cat : {CheckCategory::data_integrity, CheckCategory::train_test_validation}) {
        EXPECT_EQ(run_suite(cat, context(train, &test)), run_suite(cat, context(train, &test)));
    }
}

// -- integrity checks -----------------------------------------------------

TEST(DataDuplicates, DuplicatedRowFlagged) {
    const auto base = clean_frame(50);
    testing::Rows rows{{"1.5", "k0", "p"}, {"2.5", "k1", "q"}, {"1.5", "k0", "p"}, {"3.5", "k2", "p"}};
    const auto t = make_frame(xy_schema(), rows);
    const auto r = run_check("data_duplicates", context(t));
    EXPECT_EQ(r.status, CheckStatus::fail);  // 1 of 4 rows
    EXPECT_DOUBLE_EQ(r.metrics.at("duplicate_fraction"), 0.25);
    EXPECT_EQ(r.condition, "duplicate_fraction ≤ 0.05");

    testing::Rows many;
    for (int i = 0; i < 40; ++i) many.push_back({std::to_string(i), "k0", "p"});
    many.push_back({"0", "k0", "p"});
    const auto warn = run_check("data_duplicates", context(make_frame(xy_schema(), many)));
    EXPECT_EQ(warn.status, CheckStatus::warn);
}

TEST(ConflictingLabels, AgreesWithDuplicateCount) {
    std::mt19937_64 rng(4);
    for (std::size_t k : {0u, 1u, 3u, 7u}) {
        testing::Rows rows;
        for (int i = 0; i < 100; ++i) rows.push_back({std::to_string(i), "k" + std::to_string(i % 4), "p"});
        // k conflicting copies of k distinct rows.
        std::vector<int> picks(100);
        std::iota(picks.begin(), picks.end(), 0);
        std::shuffle(picks.begin(), picks.end(), rng);
        for (std::size_t j = 0; j < k; ++j) {
            auto copy = rows[picks[j]];
            copy[2] = "q";
            rows.push_back(copy);
        }
        const auto t = make_frame(xy_schema(), rows);
        const auto conflicts = run_check("conflicting_labels", context(t));
        const auto dups = run_check("data_duplicates", context(t));
        EXPECT_DOUBLE_EQ(conflicts.metrics.at("conflicting_groups"), static_cast<double>(k));
        EXPECT_DOUBLE_EQ(dups.metrics.at("feature_duplicate_rows"), static_cast<double>(k));
        EXPECT_EQ(conflicts.status, k == 0 ? CheckStatus::pass : CheckStatus::fail);
    }
}

TEST(PercentOfNulls, ReportsWorstColumn) {
    testing::Rows rows;
    for (int i = 0; i < 10; ++i) rows.push_back({i < 3 ? "" : "1", "k", "p"});
    const auto r = run_check("percent_of_nulls", context(make_frame(xy_schema(), rows)));
    EXPECT_EQ(r.status, CheckStatus::warn);
    EXPECT_DOUBLE_EQ(r.metrics.at("max_null_fraction"), 0.3);
    EXPECT_DOUBLE_EQ(r.details.at("x"), 0.3);
}

TEST(MixedNulls, CountsCaseFoldedTokens) {
    testing::Rows rows{{"1", "NULL", "p"}, {"2", "null", "p"}, {"3", "n/a", "q"}, {"4", "k", "q"}};
    const auto r = run_check("mixed_nulls", context(make_frame(xy_schema(), rows)));
    EXPECT_DOUBLE_EQ(r.details.at("c"), 2.0);
    EXPECT_EQ(r.status, CheckStatus::warn);
}

TEST(MixedDataTypes, RareStringsInNumericColumn) {
    testing::Rows rows;
    for (int i = 0; i < 30; ++i) rows.push_back({i == 0 ? "oops" : std::to_string(i), "k", "p"});
    const auto r = run_check("mixed_data_types", context(make_frame(xy_schema(), rows)));
    EXPECT_EQ(r.status, CheckStatus::warn);
    EXPECT_DOUBLE_EQ(r.metrics.at("columns_with_rare_type"), 1.0);
}

TEST(StringMismatch, CaseVariants) {
    testing::Rows rows{{"1", "Red", "p"}, {"2", "red ", "p"}, {"3", "blue", "q"}};
    const auto r = run_check("string_mismatch", context(make_frame(xy_schema(), rows)));
    EXPECT_DOUBLE_EQ(r.metrics.at("variant_groups"), 1.0);
    EXPECT_EQ(r.condition, "variant_groups == 0");
}

TEST(SpecialCharacters, PunctuationOnlyCells) {
    testing::Rows rows{{"1", "?", "p"}, {"2", "ok", "p"}, {"3", "ok", "q"}, {"4", "ok", "q"}};
    const auto r = run_check("special_characters", context(make_frame(xy_schema(), rows)));
    EXPECT_DOUBLE_EQ(r.metrics.at("max_special_fraction"), 0.25);
}

TEST(IsSingleValue, ConstantFeature) {
    testing::Rows rows{{"1", "k", "p"}, {"2", "k", "q"}};
    const auto r = run_check("is_single_value", context(make_frame(xy_schema(), rows)));
    EXPECT_DOUBLE_EQ(r.metrics.at("single_value_columns"), 1.0);
    EXPECT_TRUE(r.details.count("c"));
}

TEST(ClassImbalance, RatioAndSkip) {
    testing::Rows rows;
    for (int i = 0; i < 95; ++i) rows.push_back({"1", "k", "p"});
    for (int i = 0; i < 5; ++i) rows.push_back({"1", "k", "q"});
    const auto r = run_check("class_imbalance", context(make_frame(xy_schema(), rows)));
    EXPECT_NEAR(r.metrics.at("minority_majority_ratio"), 5.0 / 95.0, 1e-15);
    EXPECT_EQ(r.status, CheckStatus::fail);
    const auto one = make_frame(xy_schema(), {{"1", "k", "p"}});
    EXPECT_EQ(run_check("class_imbalance", context(one)).status, CheckStatus::skipped);
}

TEST(OutlierSamples, FlagsExtremeRow) {
    testing::Rows rows;
    for (int i = 0; i < 50; ++i) rows.push_back({std::to_string(i % 7), "k", "p"});
    rows.push_back({"1000", "k", "p"});
    const auto r = run_check("outlier_sample_detection", context(make_frame(xy_schema(), rows)));
    EXPECT_DOUBLE_EQ(r.metrics.at("outlier_rows"), 1.0);
    EXPECT_EQ(r.status, CheckStatus::warn);
}

TEST(FeatureLabelCorrelation, LeakyFeature) {
    testing::Rows rows;
    for (int i = 0; i < 100; ++i) rows.push_back({i % 2 ? "10" : "0", "k" + std::to_string(i % 3), i % 2 ? "p" : "q"});
    const auto r = run_check("feature_label_correlation", context(make_frame(xy_schema(), rows)));
    EXPECT_DOUBLE_EQ(r.details.at("x"), 1.0);
    EXPECT_EQ(r.status, CheckStatus::fail);
}

TEST(FeatureFeatureCorrelation, ReportsPairs) {
    const auto schema = make_schema({{"a", ColumnKind::numeric}, {"b", ColumnKind::numeric}, {"y", ColumnKind::categorical}}, "y");
    testing::Rows rows;
    for (int i = 0; i < 20; ++i) rows.push_back({std::to_string(i), std::to_string(2 * i + 1), i % 2 ? "p" : "q"});
    const auto r = run_check("feature_feature_correlation", context(make_frame(schema, rows)));
    EXPECT_DOUBLE_EQ(r.metrics.at("correlated_pairs"), 1.0);
    EXPECT_TRUE(r.details.count("a|b"));
}

// -- validation checks ------------------------------------------------------

TEST(LabelDrift, IdenticalSplitsPass) {
    const auto t = clean_frame();
    const auto r = run_check("label_drift", context(t, &t));
    EXPECT_EQ(r.status, CheckStatus::pass);
    EXPECT_DOUBLE_EQ(r.metrics.at("cramers_v"), 0.0);
}

TEST(LabelDrift, InvalidSplitScenario) {
    const auto s = testing::invalid_split_scenario();
    const auto train = make_frame(s.schema, s.train);
    const auto test = make_frame(s.schema, s.test);
    // Oracle over the origin x label contingency, frozen here.
    const double frozen = oracle::cramers_v({{600, 0, 0, 0, 200}, {50, 150, 150, 150, 0}});
    EXPECT_NEAR(frozen, 0.92195, 5e-6);
    const auto r = run_check("label_drift", context(train, &test));
    EXPECT_EQ(r.status, CheckStatus::fail);
    EXPECT_NEAR(r.metrics.at("cramers_v"), frozen, 1e-12);
    EXPECT_EQ(r.condition, "cramers_v ≤ 0.15");
}

TEST(LabelDrift, RegressionUsesKs) {
    const auto schema = make_schema({{"x", ColumnKind::numeric}, {"y", ColumnKind::numeric}}, "y",
                                    artifact::TaskType::regression);
    const auto a = make_frame(schema, {{"1", "1"}, {"2", "2"}, {"3", "3"}, {"4", "4"}});
    const auto b = make_frame(schema, {{"1", "3"}, {"2", "4"}, {"3", "5"}, {"4", "6"}});
    const auto r = run_check("label_drift", context(a, &b));
    EXPECT_DOUBLE_EQ(r.metrics.at("ks_statistic"), 0.5);
    EXPECT_EQ(r.status, CheckStatus::fail);
}

TEST(NewLabel, ThreeOfFourUnseen) {
    const auto schema = make_schema({{"x", ColumnKind::numeric}, {"y", ColumnKind::categorical}}, "y");
    const auto train = make_frame(schema, {{"1", "a"}, {"2", "a"}});
    const auto test = make_frame(schema, {{"1", "a"}, {"2", "b"}, {"3", "c"}, {"4", "d"}});
    const auto r = run_check("new_label", context(train, &test));
    EXPECT_EQ(r.status, CheckStatus::fail);
    EXPECT_DOUBLE_EQ(r.metrics.at("new_label_ratio"), 0.75);
    EXPECT_EQ(r.condition, "new_label_ratio == 0");
}

TEST(NewCategory, UnseenTestCategories) {
    const auto train = make_frame(xy_schema(), {{"1", "k0", "p"}, {"2", "k1", "q"}});
    const auto test = make_frame(xy_schema(), {{"1", "k0", "p"}, {"2", "k9", "q"}});
    const auto r = run_check("new_category", context(train, &test));
    EXPECT_DOUBLE_EQ(r.metrics.at("max_new_category_fraction"), 0.5);
    EXPECT_EQ(r.status, CheckStatus::fail);
}

TEST(IndexLeakage, OverlappingIndex) {
    const auto schema = make_schema({{"id", ColumnKind::identifier}, {"x", ColumnKind::numeric}, {"y", ColumnKind::categorical}},
                                    "y", artifact::TaskType::classification, "id");
    const auto train = make_frame(schema, {{"1", "1", "p"}, {"2", "2", "q"}});
    const auto test = make_frame(schema, {{"2", "5", "p"}, {"3", "6", "q"}});
    const auto r = run_check("index_leakage", context(train, &test));
    EXPECT_DOUBLE_EQ(r.metrics.at("index_overlap_count"), 1.0);
    EXPECT_EQ(r.status, CheckStatus::fail);
    EXPECT_EQ(run_check("index_leakage", context(clean_frame(), nullptr)).status, CheckStatus::skipped);
}

TEST(SamplesMix, ExactRowsShared) {
    const auto train = clean_frame(100, 1);
    const auto test = make_frame(xy_schema(), {{"9999", "k0", "p"}});
    EXPECT_EQ(run_check("train_test_samples_mix", context(train, &test)).status, CheckStatus::pass);
    const auto r = run_check("train_test_samples_mix", context(train, &train));
    EXPECT_DOUBLE_EQ(r.metrics.at("samples_mix_fraction"), 1.0);
}

TEST(DatasetsSize, Ratio) {
    const auto train = clean_frame(100);
    const auto test = clean_frame(5);
    const auto r = run_check("datasets_size_comparison", context(train, &test));
    EXPECT_DOUBLE_EQ(r.metrics.at("test_train_ratio"), 0.05);
    EXPECT_EQ(r.status, CheckStatus::fail);
}

TEST(FeatureDrift, ShiftedFeatureTopRanked) {
    const auto s = testing::numeric_scenario(500, 500, 3, 3.0, 8);
    const auto train = make_frame(s.schema, s.train);
    const auto test = make_frame(s.schema, s.test);
    const auto r = run_check("feature_drift", context(train, &test));
    EXPECT_EQ(r.status, CheckStatus::fail);
    EXPECT_GT(r.details.at("x0"), 0.8);
    EXPECT_LE(r.details.size(), 5u);
}

TEST(DomainClassifier, CopyHasNoDrift) {
    const auto s = testing::numeric_scenario(2000, 0, 5, 0.0, 21);
    const auto train = make_frame(s.schema, s.train);
    auto shuffled = s.train;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto test = make_frame(s.schema, shuffled);
    const auto r = domain_classifier_drift(train, test, {});
    ASSERT_TRUE(r.has_value());
    EXPECT_LT(r->drift_score, 0.1);
}

TEST(DomainClassifier, DisjointFeatureIsSeparable) {
    auto s = testing::numeric_scenario(2000, 2000, 5, 100.0, 22);
    const auto train = make_frame(s.schema, s.train);
    const auto test = make_frame(s.schema, s.test);
    const auto r = domain_classifier_drift(train, test, {});
    ASSERT_TRUE(r.has_value());
    EXPECT_GT(r->drift_score, 0.8);
    ASSERT_FALSE(r->contributions.empty());
    EXPECT_EQ(r->contributions.front().feature, "x0");
    const auto again = domain_classifier_drift(train, test, {});
    EXPECT_EQ(again->drift_score, r->drift_score);
}

TEST(DomainClassifier, TooFewRowsSkips) {
    const auto s = testing::numeric_scenario(5, 5, 2, 0.0, 1);
    const auto train = make_frame(s.schema, s.train);
    const auto test = make_frame(s.schema, s.test);
    EXPECT_FALSE(domain_classifier_drift(train, test, {}).has_value());
    EXPECT_EQ(run_check("multivariate_drift", context(train, &test)).status, CheckStatus::skipped);
}

TEST(DomainClassifier, CategoricalShift) {
    const auto schema = make_schema({{"c", ColumnKind::categorical}, {"y", ColumnKind::categorical}}, "y");
    testing::Rows a;
    testing::Rows b;
    for (int i = 0; i < 400; ++i) {
        a.push_back({"k" + std::to_string(i % 4), "p"});
        b.push_back({"k" + std::to_string(4 + i % 4), "p"});
    }
    const auto r = domain_classifier_drift(make_frame(schema, a), make_frame(schema, b), {});
    ASSERT_TRUE(r.has_value());
    EXPECT_GT(r->drift_score, 0.9);
}

// -- evaluation checks ------------------------------------------------------

struct Predicted {
    TableFrame train;
    TableFrame test;
    PredictionSet train_pred;
    PredictionSet test_pred;
};

Predicted predicted_fixture() {
    testing::Rows tr;
    testing::Rows te;
    for (int i = 0; i < 200; ++i) tr.push_back({std::to_string(i % 10), "k" + std::to_string(i % 2), i % 2 ? "p" : "q"});
    for (int i = 0; i < 100; ++i) te.push_back({std::to_string(i % 10), "k" + std::to_string(i % 2), i % 2 ? "p" : "q"});
    Predicted p{make_frame(xy_schema(), tr), make_frame(xy_schema(), te), {}, {}};
    p.train_pred.dataset_ref = DatasetRef::train;
    p.test_pred.dataset_ref = DatasetRef::test;
    p.train_pred.class_order = p.test_pred.class_order = std::vector<std::string>{"p", "q"};
    p.train_pred.probabilities.emplace();
    p.test_pred.probabilities.emplace();
    for (int i = 0; i < 200; ++i) {
        const std::string truth = i % 2 ? "p" : "q";
        p.train_pred.predicted_labels.push_back(truth);
        p.train_pred.probabilities->push_back(truth == "p" ? std::vector<double>{0.9, 0.1} : std::vector<double>{0.1, 0.9});
    }
    for (int i = 0; i < 100; ++i) {
        const std::string truth = i % 2 ? "p" : "q";
        // Wrong whenever x == 0, i.e. on every tenth row.
        const bool wrong = i % 10 == 0;
        const std::string pred = wrong ? (truth == "p" ? "q" : "p") : truth;
        p.test_pred.predicted_labels.push_back(pred);
        p.test_pred.probabilities->push_back(pred == "p" ? std::vector<double>{0.8, 0.2} : std::vector<double>{0.2, 0.8});
    }
    return p;
}

CheckContext predicted_context(const Predicted& p) {
    auto ctx = context(p.train, &p.test);
    ctx.train_predictions = &p.train_pred;
    ctx.test_predictions = &p.test_pred;
    return ctx;
}

TEST(Evaluation, FullSuiteRuns) {
    const auto p = predicted_fixture();
    const auto results = run_suite(CheckCategory::model_evaluation, predicted_context(p));
    ASSERT_EQ(results.size(), 8u);
    for (const auto& r : results) {
        EXPECT_NE(r.status, CheckStatus::error) << r.check_id << ": " << r.summary;
        EXPECT_NE(r.status, CheckStatus::skipped) << r.check_id << ": " << r.summary;
    }
}

TEST(Evaluation, Metrics) {
    const auto p = predicted_fixture();
    const auto ctx = predicted_context(p);
    EXPECT_DOUBLE_EQ(run_check("single_dataset_performance", ctx).metrics.at("accuracy"), 0.9);
    const auto gap = run_check("train_test_performance", ctx);
    EXPECT_NEAR(gap.metrics.at("accuracy_gap"), 0.1, 1e-12);
    const auto cmp = run_check("simple_model_comparison", ctx);
    EXPECT_DOUBLE_EQ(cmp.metrics.at("baseline_accuracy"), 0.5);
    EXPECT_DOUBLE_EQ(cmp.metrics.at("improvement_ratio"), 1.8);
    EXPECT_EQ(cmp.status, CheckStatus::pass);
    const auto ece = run_check("calibration_score", ctx);
    EXPECT_NEAR(ece.metrics.at("ece"), 0.1, 1e-12);
    const auto weak = run_check("weak_segments_performance", ctx);
    EXPECT_EQ(weak.status, CheckStatus::fail);
    // Q1 of x is 2, so the bin holds x in {0, 1, 2}: 30 rows, 10 wrong.
    EXPECT_DOUBLE_EQ(weak.details.at("x[Q1]"), 20.0 / 30.0);
}

TEST(Evaluation, PredictionLengthMismatchIsError) {
    auto p = predicted_fixture();
    p.test_pred.predicted_labels.pop_back();
    p.test_pred.probabilities->pop_back();
    EXPECT_EQ(run_check("roc_report", predicted_context(p)).status, CheckStatus::error);
}

}  // namespace
}  // namespace mlfix::checks
