#pragma once

#include "mlfix/artifact/types.hpp"

namespace mlfix::testing {

inline artifact::ArtifactBundle sample_bundle() {
    using namespace artifact;
    ArtifactBundle b;
    b.created_at = "2026-01-31T12:00:00Z";
    b.train_stats.sample_count = 100;
    ColumnStatistics age;
    age.name = "age";
    age.kind = ColumnKind::numeric;
    age.null_fraction = 0.25;
    age.distinct_count = 40;
    age.numeric_summary = NumericSummary{18.0, 90.0, 41.5, 12.25, 30.0, 40.0, 52.5};
    ColumnStatistics label;
    label.name = "label";
    label.kind = ColumnKind::categorical;
    label.distinct_count = 2;
    b.train_stats.per_column = {age, label};
    b.train_stats.class_distribution = std::map<std::string, std::int64_t>{{"no", 70}, {"yes", 30}};
    b.test_stats.sample_count = 20;
    b.test_stats.per_column = {age};

    CheckResult drift;
    drift.check_id = "label_drift";
    drift.category = CheckCategory::train_test_validation;
    drift.status = CheckStatus::fail;
    drift.metrics = {{"cramers_v", 0.92}};
    drift.condition = "cramers_v ≤ 0.15";
    drift.summary = "Label distribution shift";
    b.validation_results.push_back(drift);

    CheckResult nulls;
    nulls.check_id = "percent_of_nulls";
    nulls.category = CheckCategory::data_integrity;
    nulls.status = CheckStatus::warn;
    nulls.metrics = {{"max_null_fraction", 0.25}};
    nulls.details = {{"age", 0.25}};
    nulls.condition = "max_null_fraction ≤ 0.05";
    b.integrity_results.push_back(nulls);

    CheckpointMetadata ckpt;
    ckpt.architecture = "resnet18";
    ckpt.parameter_count = 11689512;
    ckpt.num_classes = 2;
    ckpt.training_config = {{"lr", 0.001}, {"epochs", std::int64_t{10}}, {"optimizer", std::string("adam")},
                            {"augment", true}};
    b.checkpoint = ckpt;
    b.client_info = {{"tool", "mlfix"}};
    return b;
}

inline artifact::Diagnosis sample_diagnosis() {
    using namespace artifact;
    Diagnosis d;
    Finding f;
    f.finding_id = "checks.label_drift";
    f.source_agent = SourceAgent::checks;
    f.severity = Severity::critical;
    f.confidence = 0.95;
    f.evidence = {{"label_drift", "cramers_v", 0.92}};
    f.description = "Label drift";
    Finding g = f;
    g.finding_id = "checks.percent_of_nulls";
    g.severity = Severity::low;
    g.evidence = {{"percent_of_nulls", "max_null_fraction", 0.25}};
    d.ranked_findings = {{f, 4.75}, {g, 0.95}};
    d.hypotheses = {{"Split is not random", {"checks.label_drift"}, {"kb-invalid-split"}, 0.8}};
    d.actions = {{"Recreate the train-test split", "Drift", {"checks.label_drift"}}};
    d.summary = "Invalid split";
    d.consensus = {5, 1.0, "invalid_split", 0.9};
    return d;
}

}  // namespace mlfix::testing
