#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "bundles.hpp"
#include "fixture_files.hpp"
#include "mlfix/artifact/codec.hpp"
#include "mlfix/ingest/ingest.hpp"
#include "mlfix/ingest/report.hpp"

namespace mlfix::ingest {
namespace {

using artifact::CheckStatus;

IngestConfig config_for(const testing::ScenarioFiles& f, const std::filesystem::path& out) {
    IngestConfig c;
    c.train_path = f.train;
    c.test_path = f.test;
    c.schema_path = f.schema;
    c.output_path = out;
    return c;
}

TEST(Ingest, WritesBundleWithAllSuites) {
    testing::TempDir dir;
    const auto s = testing::numeric_scenario(300, 200, 3, 0.0, 3);
    const auto files = testing::write_scenario(dir.path(), s);
    auto config = config_for(files, dir / "bundle.json");
    config.predictions_test_path = testing::write_predictions(dir / "pred.json", s, true, 7, "neg");
    const auto bundle = ingest(config);
    EXPECT_EQ(bundle.integrity_results.size(), 12u);
    EXPECT_EQ(bundle.validation_results.size(), 8u);
    EXPECT_EQ(bundle.evaluation_results.size(), 8u);
    EXPECT_EQ(bundle.train_stats.sample_count, 300);
    EXPECT_EQ(bundle.test_stats.sample_count, 200);
    const auto on_disk = artifact::decode_bundle(testing::read_text(dir / "bundle.json"));
    EXPECT_EQ(on_disk, bundle);
    EXPECT_NE(bundle.find_result("single_dataset_performance")->status, CheckStatus::skipped);
}

TEST(Ingest, NoPredictionsSkipsEvaluation) {
    testing::TempDir dir;
    const auto files = testing::write_scenario(dir.path(), testing::numeric_scenario(100, 100, 2, 0.0, 4));
    const auto bundle = build_bundle(config_for(files, dir / "b.json"));
    for (const auto& r : bundle.evaluation_results) EXPECT_EQ(r.status, CheckStatus::skipped) << r.check_id;
}

TEST(Ingest, MissingTrainNamesPathAndWritesNothing) {
    testing::TempDir dir;
    auto files = testing::write_scenario(dir.path(), testing::numeric_scenario(10, 10, 2, 0.0, 4));
    files.train = dir / "absent.csv";
    try {
        ingest(config_for(files, dir / "b.json"));
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("absent.csv"), std::string::npos);
    }
    EXPECT_FALSE(std::filesystem::exists(dir / "b.json"));
}

TEST(Ingest, MalformedRowAbortsWithoutPartialBundle) {
    testing::TempDir dir;
    const auto files = testing::write_scenario(dir.path(), testing::numeric_scenario(10, 10, 2, 0.0, 4));
    testing::write_text(files.test, testing::read_text(files.test) + "1,2\n");
    EXPECT_THROW(ingest(config_for(files, dir / "b.json")), InputError);
    EXPECT_FALSE(std::filesystem::exists(dir / "b.json"));
}

TEST(Ingest, PredictionCountMismatchRejected) {
    testing::TempDir dir;
    const auto s = testing::numeric_scenario(20, 20, 2, 0.0, 4);
    const auto files = testing::write_scenario(dir.path(), s);
    auto config = config_for(files, dir / "b.json");
    config.predictions_train_path = testing::write_predictions(dir / "p.json", s, true, 0, "");
    EXPECT_THROW(build_bundle(config), InputError);  // test predictions offered for train
}

TEST(Ingest, SourceDateEpochMakesBundlesReproducible) {
    testing::TempDir dir;
    const auto files = testing::write_scenario(dir.path(), testing::invalid_split_scenario());
    ::setenv("SOURCE_DATE_EPOCH", "1767225600", 1);
    const auto a = artifact::encode_bundle(build_bundle(config_for(files, dir / "b.json")));
    const auto b = artifact::encode_bundle(build_bundle(config_for(files, dir / "b.json")));
    ::unsetenv("SOURCE_DATE_EPOCH");
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("\"created_at\":\"2026-01-01T00:00:00Z\""), std::string::npos);
}

TEST(Ingest, SentinelCellValueNeverLeavesClient) {
    testing::TempDir dir;
    auto s = testing::invalid_split_scenario();
    const std::string sentinel = "ZZ-SENTINEL-7731";
    s.train[5][3] = sentinel;  // a single rare category
    s.test[9][3] = sentinel;
    const auto files = testing::write_scenario(dir.path(), s);
    ingest(config_for(files, dir / "b.json"));
    EXPECT_EQ(testing::read_text(dir / "b.json").find(sentinel), std::string::npos);
}

TEST(Ingest, CheckConfigOverridesApply) {
    testing::TempDir dir;
    const auto files = testing::write_scenario(dir.path(), testing::invalid_split_scenario());
    testing::write_text(dir / "cfg.json", R"({"thresholds":{"label_drift":0.95}})");
    auto config = config_for(files, dir / "b.json");
    config.config_path = dir / "cfg.json";
    const auto bundle = build_bundle(config);
    EXPECT_EQ(bundle.find_result("label_drift")->status, CheckStatus::pass);
    EXPECT_EQ(bundle.find_result("label_drift")->condition, "cramers_v ≤ 0.95");
    testing::write_text(dir / "cfg.json", R"({"thresholds":{"label_drift":7}})");
    EXPECT_THROW(build_bundle(config), InputError);
}

TEST(AtomicWrite, ReplacesContent) {
    testing::TempDir dir;
    write_file_atomic(dir / "f.txt", "one");
    write_file_atomic(dir / "f.txt", "two");
    EXPECT_EQ(testing::read_text(dir / "f.txt"), "two");
    EXPECT_THROW(write_file_atomic(dir / "missing-dir" / "f.txt", "x"), InputError);
}

// -- report -------------------------------------------------------------------

TEST(Report, CriticalFindingEvidenceVerbatim) {
    const auto d = testing::sample_diagnosis();
    const auto md = render_report(d, ReportFormat::markdown);
    EXPECT_NE(md.find("| Finding | Action |"), std::string::npos);
    EXPECT_NE(md.find("**Label drift**"), std::string::npos);
    EXPECT_NE(md.find("Cramer's V 0.92"), std::string::npos);
    EXPECT_NE(md.find("0.25"), std::string::npos);
    EXPECT_NE(md.find("**Recreate the train-test split**"), std::string::npos);
    const auto text = render_report(d, ReportFormat::plain);
    EXPECT_NE(text.find("Cramer's V 0.92"), std::string::npos);
    EXPECT_EQ(text.find("**"), std::string::npos);
}

TEST(Report, EmptyFindings) {
    artifact::Diagnosis d;
    d.summary = "Nothing stands out";
    EXPECT_NE(render_report(d, ReportFormat::markdown).find("No significant issues detected"), std::string::npos);
    EXPECT_NE(render_report(d, ReportFormat::plain).find("No significant issues detected"), std::string::npos);
}

TEST(Report, PairsDriftFindingWithSplitAction) {
    auto d = testing::sample_diagnosis();
    d.actions[0].action = "Recreate the train-test split using proper stratified sampling";
    const auto md = render_report(d, ReportFormat::markdown);
    const auto row_start = md.find("| **Label drift**");
    ASSERT_NE(row_start, std::string::npos);
    auto row = md.substr(row_start, md.find('\n', row_start) - row_start);
    EXPECT_NE(row.find("Cramer's V 0.92"), std::string::npos);
    std::transform(row.begin(), row.end(), row.begin(), [](unsigned char c) { return std::tolower(c); });
    EXPECT_NE(row.find("recreate the train-test split"), std::string::npos) << row;
}

TEST(Report, TitlesAndEscaping) {
    EXPECT_EQ(finding_title("checks.label_drift"), "Label drift");
    EXPECT_EQ(finding_title("reasoner.invalid_split"), "Invalid split");
    auto d = testing::sample_diagnosis();
    d.ranked_findings[0].finding.description = "a|b";
    EXPECT_NE(render_report(d, ReportFormat::markdown).find("a\\|b"), std::string::npos);
}

}  // namespace
}  // namespace mlfix::ingest
