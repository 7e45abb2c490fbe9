#include <gtest/gtest.h>

#include <random>

#include "bundles.hpp"
#include "fixture_files.hpp"
#include "mlfix/agents/pipeline.hpp"
#include "mlfix/artifact/catalog.hpp"
#include "mlfix/artifact/codec.hpp"
#include "mlfix/ingest/ingest.hpp"
#include "providers.hpp"

using namespace mlfix::agents;
using namespace mlfix::artifact;
using mlfix::testing::FailingProvider;
using mlfix::testing::LambdaProvider;
namespace kb = mlfix::kb;

namespace {

CheckResult result(const std::string& id, CheckStatus status, std::map<std::string, double> metrics,
                   std::string condition = "", std::map<std::string, double> details = {}) {
    CheckResult r;
    r.check_id = id;
    r.category = find_check(id)->category;
    r.status = status;
    r.metrics = std::move(metrics);
    r.condition = std::move(condition);
    r.details = std::move(details);
    r.summary = id + " summary";
    return r;
}

void add(ArtifactBundle& b, CheckResult r) {
    switch (r.category) {
        case CheckCategory::data_integrity: b.integrity_results.push_back(std::move(r)); break;
        case CheckCategory::train_test_validation: b.validation_results.push_back(std::move(r)); break;
        case CheckCategory::model_evaluation: b.evaluation_results.push_back(std::move(r)); break;
    }
}

ColumnStatistics column(const std::string& name, ColumnKind kind, double nulls = 0.0) {
    ColumnStatistics c;
    c.name = name;
    c.kind = kind;
    c.null_fraction = nulls;
    c.distinct_count = 3;
    return c;
}

// Balanced, clean, every check passing.
ArtifactBundle clean_bundle() {
    ArtifactBundle b;
    b.created_at = "2026-01-31T12:00:00Z";
    for (auto* s : {&b.train_stats, &b.test_stats}) {
        s->sample_count = 100;
        s->per_column = {column("x", ColumnKind::numeric), column("site", ColumnKind::categorical),
                         column("label", ColumnKind::categorical)};
        s->class_distribution = std::map<std::string, std::int64_t>{{"a", 50}, {"b", 50}};
    }
    add(b, result("percent_of_nulls", CheckStatus::pass, {{"max_null_fraction", 0.0}}, "max_null_fraction ≤ 0.05"));
    add(b, result("class_imbalance", CheckStatus::pass,
                  {{"minority_majority_ratio", 1.0}, {"class_count", 2.0}, {"minority_share", 0.5}},
                  "minority_majority_ratio ≥ 0.1"));
    add(b, result("label_drift", CheckStatus::pass, {{"cramers_v", 0.01}}, "cramers_v ≤ 0.15"));
    add(b, result("new_label", CheckStatus::pass, {{"new_label_ratio", 0.0}}, "new_label_ratio == 0"));
    add(b, result("feature_drift", CheckStatus::pass, {{"drift_score", 0.05}}, "drift_score ≤ 0.2", {{"x", 0.05}}));
    add(b, result("roc_report", CheckStatus::pass, {{"min_auc", 0.9}}, "min_auc ≥ 0.7"));
    CheckpointMetadata ckpt;
    ckpt.architecture = "mlp";
    ckpt.parameter_count = 1000;
    ckpt.num_classes = 2;
    ckpt.docstring = "two-class mlp";
    b.checkpoint = ckpt;
    return b;
}

CheckResult& find(ArtifactBundle& b, const std::string& id) {
    for (auto* list : {&b.integrity_results, &b.validation_results, &b.evaluation_results}) {
        for (auto& r : *list) {
            if (r.check_id == id) return r;
        }
    }
    throw std::runtime_error(id);
}

ArtifactBundle invalid_split_bundle() {
    mlfix::testing::TempDir dir;
    const auto s = mlfix::testing::invalid_split_scenario();
    const auto files = mlfix::testing::write_scenario(dir.path(), s);
    mlfix::ingest::IngestConfig config;
    config.train_path = files.train;
    config.test_path = files.test;
    config.schema_path = files.schema;
    return mlfix::ingest::build_bundle(config);
}

const kb::KnowledgeBase& seed_kb() {
    static const kb::KnowledgeBase kb(kb::seed_corpus());
    return kb;
}

Finding finding(std::string id, Severity s, double conf, std::string check = "") {
    Finding f;
    f.finding_id = std::move(id);
    f.severity = s;
    f.confidence = conf;
    if (!check.empty()) f.evidence.push_back({check, "m", 1.0});
    return f;
}

std::size_t position(const Diagnosis& d, const std::string& id) {
    for (std::size_t i = 0; i < d.ranked_findings.size(); ++i) {
        if (d.ranked_findings[i].finding.finding_id == id) return i;
    }
    return d.ranked_findings.size();
}

bool has_finding(const std::vector<Finding>& fs, const std::string& id) {
    return std::any_of(fs.begin(), fs.end(), [&](const Finding& f) { return f.finding_id == id; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Severity mapping and analyzers

TEST(Severity, MappingFollowsCategories) {
    EXPECT_EQ(check_severity(result("label_drift", CheckStatus::fail, {{"cramers_v", 0.92}}, "cramers_v ≤ 0.15")),
              Severity::critical);
    EXPECT_EQ(check_severity(result("label_drift", CheckStatus::fail, {{"cramers_v", 0.3}}, "cramers_v ≤ 0.15")),
              Severity::high);
    EXPECT_EQ(check_severity(result("new_label", CheckStatus::fail, {{"new_label_ratio", 0.75}},
                                    "new_label_ratio == 0")),
              Severity::critical);
    EXPECT_EQ(check_severity(result("datasets_size_comparison", CheckStatus::fail, {{"test_train_ratio", 0.02}},
                                    "test_train_ratio ≥ 0.1")),
              Severity::critical);
    EXPECT_EQ(check_severity(result("datasets_size_comparison", CheckStatus::fail, {{"test_train_ratio", 0.05}},
                                    "test_train_ratio ≥ 0.1")),
              Severity::high);
    EXPECT_EQ(check_severity(result("conflicting_labels", CheckStatus::fail, {{"conflicting_groups", 2}})),
              Severity::high);
    EXPECT_EQ(check_severity(result("feature_label_correlation", CheckStatus::fail, {{"x", 1}})), Severity::high);
    EXPECT_EQ(check_severity(result("class_imbalance", CheckStatus::fail, {{"x", 1}})), Severity::medium);
    EXPECT_EQ(check_severity(result("calibration_score", CheckStatus::fail, {{"ece", 0.5}})), Severity::medium);
    EXPECT_EQ(check_severity(result("mixed_nulls", CheckStatus::warn, {{"x", 1}})), Severity::low);
    EXPECT_FALSE(check_severity(result("mixed_nulls", CheckStatus::pass, {{"x", 1}})));
    EXPECT_FALSE(check_severity(result("mixed_nulls", CheckStatus::skipped, {})));
}

TEST(ChecksAnalyzer, AllPassGivesNothing) { EXPECT_TRUE(check_rule_findings(clean_bundle()).empty()); }

TEST(ChecksAnalyzer, LabelDriftFailIsCriticalWithEvidence) {
    auto b = clean_bundle();
    find(b, "label_drift") = result("label_drift", CheckStatus::fail, {{"cramers_v", 0.92}}, "cramers_v ≤ 0.15");
    const auto fs = check_rule_findings(b);
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(fs[0].finding_id, "checks.label_drift");
    EXPECT_EQ(fs[0].severity, Severity::critical);
    EXPECT_DOUBLE_EQ(fs[0].confidence, 0.95);
    ASSERT_FALSE(fs[0].evidence.empty());
    EXPECT_EQ(fs[0].evidence[0].metric, "cramers_v");
    EXPECT_DOUBLE_EQ(fs[0].evidence[0].value, 0.92);
    EXPECT_NE(fs[0].description.find("0.92"), std::string::npos);
    EXPECT_NE(fs[0].description.find("0.15"), std::string::npos);
}

TEST(ChecksAnalyzer, ThreeFailsThreeDistinctFindings) {
    auto b = clean_bundle();
    find(b, "label_drift").status = CheckStatus::fail;
    find(b, "feature_drift").status = CheckStatus::fail;
    find(b, "roc_report").status = CheckStatus::fail;
    const auto fs = check_rule_findings(b);
    ASSERT_GE(fs.size(), 3u);
    std::set<std::string> ids;
    for (const auto& f : fs) ids.insert(f.evidence.at(0).check_id);
    EXPECT_EQ(ids.size(), fs.size());
}

TEST(DatasetAnalyzer, CleanStatsGiveNothing) { EXPECT_TRUE(dataset_rule_findings(clean_bundle()).empty()); }

TEST(DatasetAnalyzer, RulesFire) {
    auto b = clean_bundle();
    b.train_stats.class_distribution = std::map<std::string, std::int64_t>{{"a", 500}, {"b", 10}};
    b.test_stats.class_distribution = std::map<std::string, std::int64_t>{{"a", 10}, {"b", 90}};
    b.test_stats.per_column[0].null_fraction = 0.4;
    const auto fs = dataset_rule_findings(b);
    ASSERT_EQ(fs.size(), 3u);
    EXPECT_EQ(fs[0].finding_id, "dataset.class_imbalance");
    EXPECT_EQ(fs[0].severity, Severity::high);
    EXPECT_EQ(fs[1].finding_id, "dataset.high_null_fraction");
    EXPECT_EQ(fs[1].severity, Severity::medium);
    EXPECT_EQ(fs[2].finding_id, "dataset.class_distribution_divergence");
    EXPECT_EQ(fs[2].severity, Severity::high);
    for (const auto& f : fs) EXPECT_FALSE(f.evidence.empty()) << f.finding_id;
}

TEST(DatasetAnalyzer, ScriptedProviderAddsFinding) {
    auto b = clean_bundle();
    b.train_stats.class_distribution = std::map<std::string, std::int64_t>{{"a", 500}, {"b", 10}};
    auto provider = std::make_shared<LambdaProvider>([](const LLMRequest& r) -> std::string {
        if (mlfix::testing::last_user(r).find("Role: dataset analyzer") == std::string::npos) return "{}";
        return R"({"findings": [{"finding_id": "skewed x", "severity": "medium", "description": "x is skewed",
                   "evidence": [{"check_id": "feature_drift", "metric": "drift_score"},
                                {"check_id": "nope", "metric": "m"}]},
                  {"severity": "high", "description": "no evidence, dropped", "evidence": []}]})";
    });
    ProviderSession session(provider, 1);
    const auto rules = dataset_rule_findings(b);
    const auto fs = analyze_dataset(b, session);
    ASSERT_EQ(fs.size(), rules.size() + 1);
    for (std::size_t i = 0; i < rules.size(); ++i) EXPECT_EQ(fs[i], rules[i]);
    const auto& extra = fs.back();
    EXPECT_EQ(extra.finding_id, "dataset.llm.skewedx");
    EXPECT_DOUBLE_EQ(extra.confidence, 0.6);
    ASSERT_EQ(extra.evidence.size(), 1u);
    EXPECT_DOUBLE_EQ(extra.evidence[0].value, 0.05);
    EXPECT_FALSE(session.degraded());
}

TEST(CheckpointAnalyzer, Rules) {
    auto b = clean_bundle();
    for (const auto& f : checkpoint_rule_findings(b)) EXPECT_EQ(f.severity, Severity::info);
    EXPECT_TRUE(checkpoint_rule_findings(b).empty());

    b.checkpoint->num_classes = 10;
    b.train_stats.class_distribution = std::map<std::string, std::int64_t>{{"a", 5}, {"b", 5}, {"c", 5}};
    auto fs = checkpoint_rule_findings(b);
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(fs[0].finding_id, "checkpoint.config_mismatch");
    EXPECT_EQ(fs[0].severity, Severity::critical);

    b.checkpoint->parameter_count = 0;
    b.checkpoint->docstring.reset();
    fs = checkpoint_rule_findings(b);
    EXPECT_TRUE(has_finding(fs, "checkpoint.zero_parameters"));
    EXPECT_TRUE(has_finding(fs, "checkpoint.missing_docstring"));

    b.checkpoint.reset();
    fs = checkpoint_rule_findings(b);
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(fs[0].severity, Severity::info);
    EXPECT_NE(fs[0].description.find("No checkpoint provided"), std::string::npos);
}

TEST(Registry, BuiltinsAndExtension) {
    AgentRegistry r;
    ASSERT_EQ(r.agents().size(), 3u);
    EXPECT_EQ(r.agents()[0].first, "dataset");
    EXPECT_EQ(r.agents()[1].first, "checks");
    EXPECT_EQ(r.agents()[2].first, "checkpoint");
    EXPECT_THROW(r.register_agent("checks", analyze_checks), std::invalid_argument);
    r.register_agent("custom", [](const ArtifactBundle&, ProviderSession&) {
        Finding f;
        f.finding_id = "custom.one";
        f.severity = Severity::low;
        f.confidence = 0.5;
        f.evidence = {{"label_drift", "cramers_v", 0.01}, {"not_in_bundle", "m", 1.0}};
        f.description = "custom";
        return std::vector<Finding>{f};
    });
    PipelineOptions opts;
    opts.registry = &r;
    const auto d = run_pipeline(clean_bundle(), std::make_shared<EchoProvider>(), seed_kb(), opts);
    const auto p = position(d, "custom.one");
    ASSERT_LT(p, d.ranked_findings.size());
    EXPECT_EQ(d.ranked_findings[p].finding.evidence.size(), 1u);
}

// ---------------------------------------------------------------------------
// Aggregation

TEST(Aggregate, InvalidSplitCluster) {
    auto b = clean_bundle();
    find(b, "label_drift") = result("label_drift", CheckStatus::fail, {{"cramers_v", 0.92}}, "cramers_v ≤ 0.15");
    find(b, "new_label") = result("new_label", CheckStatus::fail, {{"new_label_ratio", 0.75}}, "new_label_ratio == 0");
    const auto clusters = aggregate_findings(check_rule_findings(b), b);
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].cluster_id, "invalid-split");
    EXPECT_EQ(clusters[0].correlation_rule_id, "R1");
    EXPECT_EQ(clusters[0].members.size(), 2u);
}

TEST(Aggregate, DisjointColumnsGiveSingletons) {
    auto b = clean_bundle();
    find(b, "percent_of_nulls") = result("percent_of_nulls", CheckStatus::warn, {{"max_null_fraction", 0.1}},
                                         "max_null_fraction ≤ 0.05", {{"x", 0.1}});
    find(b, "feature_drift") =
        result("feature_drift", CheckStatus::fail, {{"drift_score", 0.5}}, "drift_score ≤ 0.2", {{"site", 0.5}});
    const auto clusters = aggregate_findings(check_rule_findings(b), b);
    ASSERT_EQ(clusters.size(), 2u);
    for (const auto& c : clusters) {
        EXPECT_EQ(c.correlation_rule_id, "singleton");
        EXPECT_EQ(c.members.size(), 1u);
    }
}

TEST(Aggregate, SharedColumnMerges) {
    auto b = clean_bundle();
    find(b, "percent_of_nulls") = result("percent_of_nulls", CheckStatus::warn, {{"max_null_fraction", 0.1}},
                                         "max_null_fraction ≤ 0.05", {{"x", 0.1}});
    find(b, "feature_drift") =
        result("feature_drift", CheckStatus::fail, {{"drift_score", 0.5}}, "drift_score ≤ 0.2", {{"x", 0.5}});
    const auto clusters = aggregate_findings(check_rule_findings(b), b);
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].correlation_rule_id, "shared-evidence");
    EXPECT_NE(clusters[0].narrative.find("sharing x"), std::string::npos);
}

TEST(Aggregate, EmptyInput) { EXPECT_TRUE(aggregate_findings({}, clean_bundle()).empty()); }

TEST(Aggregate, CanonicalRulesTwoToFour) {
    auto b = clean_bundle();
    b.train_stats.class_distribution = std::map<std::string, std::int64_t>{{"a", 500}, {"b", 20}};
    find(b, "class_imbalance").status = CheckStatus::fail;
    add(b, result("weak_segments_performance", CheckStatus::fail, {{"weak_segment_count", 1}},
                  "segment_accuracy ≥ global_accuracy - 0.2", {{"class=b", 0.3}}));
    add(b, result("train_test_samples_mix", CheckStatus::fail, {{"samples_mix_fraction", 0.3}},
                  "samples_mix_fraction ≤ 0.01"));
    add(b, result("train_test_performance", CheckStatus::fail, {{"accuracy_gap", 0.3}}, "accuracy_gap ≤ 0.1"));
    add(b, result("calibration_score", CheckStatus::fail, {{"ece", 0.4}}, "ece ≤ 0.1"));
    b.checkpoint->num_classes = 5;
    std::vector<Finding> fs = dataset_rule_findings(b);
    for (auto& f : check_rule_findings(b)) fs.push_back(f);
    for (auto& f : checkpoint_rule_findings(b)) fs.push_back(f);
    const auto clusters = aggregate_findings(fs, b);
    std::map<std::string, const FindingCluster*> by_rule;
    for (const auto& c : clusters) by_rule[c.correlation_rule_id] = &c;
    ASSERT_TRUE(by_rule.count("R2"));
    ASSERT_TRUE(by_rule.count("R3"));
    ASSERT_TRUE(by_rule.count("R4"));
    EXPECT_TRUE(has_finding(by_rule["R2"]->members, "checks.weak_segments_performance"));
    EXPECT_TRUE(has_finding(by_rule["R2"]->members, "dataset.class_imbalance"));
    EXPECT_TRUE(has_finding(by_rule["R3"]->members, "checks.train_test_performance"));
    EXPECT_TRUE(has_finding(by_rule["R4"]->members, "checks.calibration_score"));
    // Each finding lands in exactly one cluster.
    std::size_t total = 0;
    for (const auto& c : clusters) total += c.members.size();
    std::size_t non_info = 0;
    for (const auto& f : fs) non_info += f.severity != Severity::info;
    EXPECT_EQ(total, non_info);
}

TEST(Aggregate, Deterministic) {
    const auto b = invalid_split_bundle();
    std::vector<Finding> fs = dataset_rule_findings(b);
    for (auto& f : check_rule_findings(b)) fs.push_back(f);
    const auto a = aggregate_findings(fs, b);
    const auto c = aggregate_findings(fs, b);
    ASSERT_EQ(a.size(), c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].cluster_id, c[i].cluster_id);
        EXPECT_EQ(a[i].members, c[i].members);
    }
}

// ---------------------------------------------------------------------------
// Hypotheses

TEST(Hypotheses, InvalidSplitCitesStratifiedSplitting) {
    auto b = clean_bundle();
    find(b, "label_drift") = result("label_drift", CheckStatus::fail, {{"cramers_v", 0.92}}, "cramers_v ≤ 0.15");
    find(b, "new_label") = result("new_label", CheckStatus::fail, {{"new_label_ratio", 0.75}}, "new_label_ratio == 0");
    const auto clusters = aggregate_findings(check_rule_findings(b), b);
    ProviderSession session(std::make_shared<EchoProvider>(), 1);
    const auto hs = generate_hypotheses(clusters, seed_kb(), session);
    ASSERT_EQ(hs.size(), 1u);
    EXPECT_EQ(hs[0].kb_citations, (std::vector<std::string>{"stratified-splitting"}));
    EXPECT_GT(hs[0].plausibility, 0.5);
    const auto hits = seed_kb().search(cluster_query(clusters[0]), 3);
    EXPECT_EQ(hits.front().doc_id, "stratified-splitting");
}

TEST(Hypotheses, NoKbMatchCapsPlausibility) {
    auto b = clean_bundle();
    find(b, "label_drift") = result("label_drift", CheckStatus::fail, {{"cramers_v", 0.92}}, "cramers_v ≤ 0.15");
    find(b, "new_label") = result("new_label", CheckStatus::fail, {{"new_label_ratio", 0.75}}, "new_label_ratio == 0");
    const auto clusters = aggregate_findings(check_rule_findings(b), b);
    const kb::KnowledgeBase empty(std::vector<kb::KBDocument>{});
    auto provider = std::make_shared<LambdaProvider>([](const LLMRequest&) {
        return std::string(R"({"statement": "s", "plausibility": 0.95, "citations": ["stratified-splitting"]})");
    });
    ProviderSession session(provider, 1);
    const auto hs = generate_hypotheses(clusters, empty, session);
    ASSERT_EQ(hs.size(), 1u);
    EXPECT_TRUE(hs[0].kb_citations.empty());
    EXPECT_LE(hs[0].plausibility, 0.5);
}

TEST(Hypotheses, ProviderCitationsRestrictedToHits) {
    auto b = clean_bundle();
    find(b, "label_drift") = result("label_drift", CheckStatus::fail, {{"cramers_v", 0.92}}, "cramers_v ≤ 0.15");
    find(b, "new_label") = result("new_label", CheckStatus::fail, {{"new_label_ratio", 0.75}}, "new_label_ratio == 0");
    const auto clusters = aggregate_findings(check_rule_findings(b), b);
    auto provider = std::make_shared<LambdaProvider>([](const LLMRequest&) {
        return std::string(
            R"({"statement": "split is broken", "plausibility": 0.7, "citations": ["made-up", "stratified-splitting"]})");
    });
    ProviderSession session(provider, 1);
    const auto hs = generate_hypotheses(clusters, seed_kb(), session);
    EXPECT_EQ(hs[0].statement, "split is broken");
    EXPECT_EQ(hs[0].kb_citations, (std::vector<std::string>{"stratified-splitting"}));
}

TEST(Hypotheses, EmptyClusters) {
    ProviderSession session(std::make_shared<EchoProvider>(), 1);
    EXPECT_TRUE(generate_hypotheses({}, seed_kb(), session).empty());
}

TEST(Hypotheses, WebDocsAreSessionLocal) {
    auto b = clean_bundle();
    find(b, "label_drift") = result("label_drift", CheckStatus::fail, {{"cramers_v", 0.92}}, "cramers_v ≤ 0.15");
    find(b, "new_label") = result("new_label", CheckStatus::fail, {{"new_label_ratio", 0.75}}, "new_label_ratio == 0");
    const auto clusters = aggregate_findings(check_rule_findings(b), b);
    kb::KBDocument web{"web-split", "Invalid split label drift", "invalid split label drift new label new label", {},
                       kb::DocumentSource::web};
    kb::StubWebSearch stub({{cluster_query(clusters[0]), {web}}});
    auto provider = std::make_shared<LambdaProvider>([](const LLMRequest&) {
        return std::string(R"({"statement": "s", "plausibility": 0.7, "citations": ["web-split"]})");
    });
    ProviderSession session(provider, 1);
    const auto& kb = seed_kb();
    const auto hs = generate_hypotheses(clusters, kb, session, &stub);
    EXPECT_EQ(hs[0].kb_citations, (std::vector<std::string>{"web-split"}));
    EXPECT_EQ(kb.find("web-split"), nullptr);
}

// ---------------------------------------------------------------------------
// Ranking

TEST(Ranking, ScoreIsWeightTimesConfidence) {
    std::vector<Finding> fs{finding("b.high", Severity::high, 1.0), finding("a.crit", Severity::critical, 0.9)};
    sort_findings(fs);
    EXPECT_EQ(fs[0].finding_id, "a.crit");
    EXPECT_NEAR(rank_score(fs[0]), 3.6, 1e-12);
    EXPECT_NEAR(rank_score(fs[1]), 3.0, 1e-12);
}

TEST(Ranking, TiesByCategoryThenId) {
    std::vector<Finding> fs{finding("z.eval", Severity::high, 0.9, "roc_report"),
                            finding("b.integ", Severity::high, 0.9, "mixed_nulls"),
                            finding("a.integ", Severity::high, 0.9, "mixed_nulls"),
                            finding("y.valid", Severity::high, 0.9, "label_drift")};
    sort_findings(fs);
    EXPECT_EQ(fs[0].finding_id, "y.valid");
    EXPECT_EQ(fs[1].finding_id, "a.integ");
    EXPECT_EQ(fs[2].finding_id, "b.integ");
    EXPECT_EQ(fs[3].finding_id, "z.eval");
}

TEST(Ranking, RaisingSeverityNeverLowersPosition) {
    std::mt19937 rng(5);
    const char* checks[] = {"label_drift", "mixed_nulls", "roc_report", ""};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Finding> fs;
        for (int i = 0; i < 8; ++i) {
            fs.push_back(finding("f" + std::to_string(i), static_cast<Severity>(rng() % 5),
                                 static_cast<double>(rng() % 5) / 4.0, checks[rng() % 4]));
        }
        const std::size_t target = rng() % fs.size();
        if (fs[target].severity == Severity::critical) continue;
        auto before = fs;
        sort_findings(before);
        auto raised = fs;
        raised[target].severity = static_cast<Severity>(static_cast<int>(raised[target].severity) - 1);
        sort_findings(raised);
        auto pos = [&](const std::vector<Finding>& v) {
            return std::find_if(v.begin(), v.end(), [&](const Finding& f) { return f.finding_id == fs[target].finding_id; }) -
                   v.begin();
        };
        EXPECT_LE(pos(raised), pos(before));
    }
}

// ---------------------------------------------------------------------------
// Pipeline

TEST(Pipeline, CleanBundleHasNoIssues) {
    const auto b = clean_bundle();
    const auto d = run_pipeline(b, std::make_shared<EchoProvider>(), seed_kb());
    for (const auto& rf : d.ranked_findings) EXPECT_EQ(rf.finding.severity, Severity::info);
    ASSERT_EQ(d.actions.size(), 1u);
    EXPECT_NE(d.actions[0].action.find("No action required"), std::string::npos);
    EXPECT_EQ(d.summary, "No significant issues detected.");
    EXPECT_EQ(d.consensus.samples, 5);
    EXPECT_EQ(d.consensus.root_cause_category, "none");
    EXPECT_FALSE(d.degraded);
    EXPECT_NO_THROW(validate_diagnosis(d));
}

TEST(Pipeline, InvalidSplitScenario) {
    const auto b = invalid_split_bundle();
    const auto run = run_pipeline_traced(b, std::make_shared<EchoProvider>(), seed_kb());
    const auto& d = run.diagnosis;
    ASSERT_FALSE(d.ranked_findings.empty());
    const auto& top = d.ranked_findings.front().finding;
    EXPECT_EQ(top.finding_id, "reasoner.invalid-split");
    EXPECT_EQ(top.severity, Severity::critical);
    ASSERT_FALSE(d.actions.empty());
    EXPECT_NE(d.actions.front().action.find("recreate the train-test split"), std::string::npos);
    EXPECT_EQ(d.consensus.root_cause_category, "invalid-split");
    EXPECT_DOUBLE_EQ(d.consensus.agreement, 1.0);
    EXPECT_EQ(d.consensus.samples, 5);
    EXPECT_FALSE(d.degraded);
    ASSERT_FALSE(d.hypotheses.empty());
    EXPECT_EQ(d.hypotheses.front().kb_citations.front(), "stratified-splitting");
    EXPECT_NO_THROW(validate_diagnosis(d));

    // Same input, same bytes.
    const auto again = run_pipeline(b, std::make_shared<EchoProvider>(), seed_kb());
    EXPECT_EQ(encode_diagnosis(d), encode_diagnosis(again));
}

TEST(Pipeline, RuleFindingsSurviveAndEvidenceResolves) {
    const auto b = invalid_split_bundle();
    auto noisy = std::make_shared<LambdaProvider>([](const LLMRequest& r) -> std::string {
        const auto u = mlfix::testing::last_user(r);
        if (u.find("Role: check-report analyzer") != std::string::npos) {
            return R"({"findings": [{"finding_id": "extra", "severity": "low", "description": "extra",
                       "evidence": [{"check_id": "label_drift", "metric": "cramers_v"}]}]})";
        }
        if (u.find("Role: cross-artifact reasoner") != std::string::npos) {
            return R"({"root_cause_category": "data-leak", "actions": ["Audit the pipeline"], "confidence": 0.5})";
        }
        return "{}";
    });
    const auto run = run_pipeline_traced(b, noisy, seed_kb());
    const auto& d = run.diagnosis;
    std::vector<Finding> out;
    for (const auto& rf : d.ranked_findings) out.push_back(rf.finding);
    for (const auto& rule : run.rule_findings) {
        const auto it = std::find_if(out.begin(), out.end(), [&](const Finding& f) { return f.finding_id == rule.finding_id; });
        ASSERT_NE(it, out.end()) << rule.finding_id;
        EXPECT_EQ(*it, rule);
    }
    EXPECT_TRUE(has_finding(out, "checks.llm.extra"));
    std::set<std::string> bundle_checks;
    for (const auto* r : b.all_results()) bundle_checks.insert(r->check_id);
    for (const auto& f : out) {
        for (const auto& e : f.evidence) EXPECT_TRUE(bundle_checks.count(e.check_id)) << e.check_id;
    }
    // Citation closure.
    for (std::size_t i = 0; i < run.clusters.size(); ++i) {
        const auto hits = seed_kb().search(cluster_query(run.clusters[i]), 3);
        for (const auto& h : d.hypotheses) {
            if (h.supporting_findings.back() != run.clusters[i].members.back().finding_id) continue;
            for (const auto& c : h.kb_citations) {
                EXPECT_TRUE(std::any_of(hits.begin(), hits.end(), [&](const kb::SearchHit& x) { return x.doc_id == c; }));
            }
        }
    }
    EXPECT_EQ(d.consensus.root_cause_category, "data-leak");
    EXPECT_TRUE(std::any_of(d.actions.begin(), d.actions.end(),
                            [](const Action& a) { return a.action == "Audit the pipeline"; }));
    EXPECT_NO_THROW(validate_diagnosis(d));
}

TEST(Pipeline, ProviderDownDegrades) {
    const auto b = invalid_split_bundle();
    auto failing = std::make_shared<FailingProvider>();
    const auto d = run_pipeline(b, failing, seed_kb());
    EXPECT_TRUE(d.degraded);
    EXPECT_EQ(d.consensus.samples, 0);
    EXPECT_EQ(d.consensus.root_cause_category, "invalid-split");
    EXPECT_EQ(d.ranked_findings.front().finding.finding_id, "reasoner.invalid-split");
    EXPECT_NE(d.actions.front().action.find("recreate the train-test split"), std::string::npos);
    // The first failure short-circuits the rest of the run.
    EXPECT_EQ(failing->calls, 1);
    EXPECT_NO_THROW(validate_diagnosis(d));

    const auto none = run_pipeline(b, nullptr, seed_kb());
    EXPECT_TRUE(none.degraded);
    EXPECT_EQ(encode_diagnosis(none), encode_diagnosis(d));
}

TEST(Pipeline, DegradedForAnyValidBundle) {
    auto failing = std::make_shared<FailingProvider>();
    for (auto b : {clean_bundle(), mlfix::testing::sample_bundle(), invalid_split_bundle()}) {
        const auto d = run_pipeline(b, failing, seed_kb());
        EXPECT_TRUE(d.degraded);
        EXPECT_NO_THROW(validate_diagnosis(d));
    }
}

TEST(Pipeline, UnparseableConsensusFallsBack) {
    auto provider = std::make_shared<LambdaProvider>([](const LLMRequest&) { return std::string("no json"); });
    const auto d = run_pipeline(invalid_split_bundle(), provider, seed_kb());
    EXPECT_TRUE(d.degraded);
    EXPECT_EQ(d.consensus.samples, 0);
    EXPECT_EQ(d.ranked_findings.front().finding.finding_id, "reasoner.invalid-split");
}

TEST(Pipeline, ExpiredDeadlineDegrades) {
    PipelineOptions opts;
    opts.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    auto echo = std::make_shared<LambdaProvider>([](const LLMRequest&) { return std::string("{}"); });
    const auto d = run_pipeline(invalid_split_bundle(), echo, seed_kb(), opts);
    EXPECT_TRUE(d.degraded);
    EXPECT_EQ(echo->calls, 0);
}

TEST(Pipeline, ScriptedReplayMatchesRecording) {
    const auto b = invalid_split_bundle();
    auto recorder = std::make_shared<RecordingProvider>(std::make_shared<EchoProvider>());
    const auto recorded = run_pipeline(b, recorder, seed_kb());
    auto stub = std::make_shared<ScriptedProvider>(recorder->recorded());
    const auto replayed = run_pipeline(b, stub, seed_kb());
    EXPECT_FALSE(replayed.degraded);
    EXPECT_EQ(encode_diagnosis(recorded), encode_diagnosis(replayed));
}
