#include "mlfix/artifact/codec.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include <openssl/evp.h>

#include "mlfix/artifact/catalog.hpp"

namespace mlfix::artifact {
namespace {

// Path-aware accessor over a JSON object. Every failure names the field.
class Reader {
public:
    Reader(const Json& json, std::string path) : json_(json), path_(std::move(path)) {
        if (!json_.is_object()) throw DecodeError(path_, "expected an object");
    }

    std::string child(std::string_view key) const { return path_ + "." + std::string(key); }
    const std::string& path() const { return path_; }

    bool has(std::string_view key) const {
        auto it = json_.find(std::string(key));
        return it != json_.end() && !it->is_null();
    }

    const Json& at(std::string_view key) const {
        auto it = json_.find(std::string(key));
        if (it == json_.end() || it->is_null()) throw DecodeError(child(key), "missing required field");
        return *it;
    }

    std::string string(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_string()) throw DecodeError(child(key), "expected a string");
        return v.get<std::string>();
    }

    std::optional<std::string> optional_string(std::string_view key) const {
        return has(key) ? std::optional(string(key)) : std::nullopt;
    }

    double number(std::string_view key) const { return as_number(at(key), child(key)); }

    std::int64_t integer(std::string_view key) const { return as_integer(at(key), child(key)); }

    bool boolean(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_boolean()) throw DecodeError(child(key), "expected a boolean");
        return v.get<bool>();
    }

    const Json& array(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_array()) throw DecodeError(child(key), "expected an array");
        return v;
    }

    const Json& object(std::string_view key) const {
        const auto& v = at(key);
        if (!v.is_object()) throw DecodeError(child(key), "expected an object");
        return v;
    }

    template <typename E>
    E enumeration(std::string_view key, std::optional<E> (*parse)(std::string_view)) const {
        auto text = string(key);
        auto value = parse(text);
        if (!value) throw DecodeError(child(key), "unknown value '" + text + "'");
        return *value;
    }

    static double as_number(const Json& v, const std::string& path) {
        if (!v.is_number()) throw DecodeError(path, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw DecodeError(path, "non-finite number");
        return d;
    }

    static std::int64_t as_integer(const Json& v, const std::string& path) {
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
                return static_cast<std::int64_t>(d);
            }
        }
        throw DecodeError(path, "expected an integer");
    }

    static std::string as_string(const Json& v, const std::string& path) {
        if (!v.is_string()) throw DecodeError(path, "expected a string");
        return v.get<std::string>();
    }

private:
    const Json& json_;
    std::string path_;
};

std::string indexed(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

std::vector<std::string> string_list(const Json& array, const std::string& path) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < array.size(); ++i) out.push_back(Reader::as_string(array[i], indexed(path, i)));
    return out;
}

std::map<std::string, double> number_map(const Json& object, const std::string& path) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : object.items()) out[k] = Reader::as_number(v, path + "." + k);
    return out;
}

void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) throw DecodeError(path, message);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

// Invariant checks shared by encode (EncodeError) and decode (DecodeError).
template <typename Fail>
void check_statistics(const DatasetStatistics& s, const std::string& path, Fail fail) {
    if (s.sample_count < 0) fail(path + ".sample_count", "must be non-negative");
    for (std::size_t i = 0; i < s.per_column.size(); ++i) {
        const auto& c = s.per_column[i];
        const auto cp = indexed(path + ".per_column", i);
        if (!std::isfinite(c.null_fraction) || !in_unit(c.null_fraction)) {
            fail(cp + ".null_fraction", "must lie in [0, 1]");
        }
        if (c.distinct_count < 0) fail(cp + ".distinct_count", "must be non-negative");
        if (c.numeric_summary) {
            const auto& n = *c.numeric_summary;
            for (double v : {n.min, n.max, n.mean, n.std, n.q1, n.median, n.q3}) {
                if (!std::isfinite(v)) fail(cp + ".numeric_summary", "non-finite metric");
            }
            if (!(n.min <= n.q1 && n.q1 <= n.median && n.median <= n.q3 && n.q3 <= n.max)) {
                fail(cp + ".numeric_summary.quartiles", "quartiles must be monotone within [min, max]");
            }
        }
    }
    if (s.class_distribution) {
        std::int64_t total = 0;
        for (const auto& [label, count] : *s.class_distribution) {
            if (count < 0) fail(path + ".class_distribution." + label, "count must be non-negative");
            total += count;
        }
        if (total > s.sample_count) fail(path + ".class_distribution", "counts exceed sample_count");
    }
}

template <typename Fail>
void check_results(const std::vector<CheckResult>& results, CheckCategory expected,
                   const std::string& path, Fail fail) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const auto rp = indexed(path, i);
        auto entry = find_check(r.check_id);
        if (!entry) fail(rp + ".check_id", "unknown check '" + r.check_id + "'");
        if (entry->category != expected || r.category != expected) {
            fail(rp + ".category", "check '" + r.check_id + "' does not belong to " +
                                       std::string(to_string(expected)));
        }
        if (!seen.insert(r.check_id).second) fail(rp + ".check_id", "duplicate check '" + r.check_id + "'");
        for (const auto& [name, value] : r.metrics) {
            if (!std::isfinite(value)) fail(rp + ".metrics." + name, "non-finite metric");
        }
        for (const auto& [name, value] : r.details) {
            if (!std::isfinite(value)) fail(rp + ".details." + name, "non-finite metric");
        }
    }
}

template <typename Fail>
void check_bundle(const ArtifactBundle& b, Fail fail) {
    const auto dot = b.bundle_version.find('.');
    const auto major = b.bundle_version.substr(0, dot);
    if (major != "1") fail("$.bundle_version", "unsupported major version '" + b.bundle_version + "'");
    if (b.modality != kModalityTabular) fail("$.modality", "only 'tabular' is supported");
    if (b.created_at.empty()) fail("$.created_at", "must be a UTC timestamp");
    check_statistics(b.train_stats, "$.train_stats", fail);
    check_statistics(b.test_stats, "$.test_stats", fail);
    check_results(b.integrity_results, CheckCategory::data_integrity, "$.integrity_results", fail);
    check_results(b.validation_results, CheckCategory::train_test_validation, "$.validation_results", fail);
    check_results(b.evaluation_results, CheckCategory::model_evaluation, "$.evaluation_results", fail);
    if (b.checkpoint) {
        if (b.checkpoint->parameter_count < 0) fail("$.checkpoint.parameter_count", "must be non-negative");
        if (b.checkpoint->num_classes && *b.checkpoint->num_classes < 2) {
            fail("$.checkpoint.num_classes", "must be at least 2");
        }
        for (const auto& [k, v] : b.checkpoint->training_config) {
            if (const auto* d = std::get_if<double>(&v); d && !std::isfinite(*d)) {
                fail("$.checkpoint.training_config." + k, "non-finite metric");
            }
        }
    }
}

template <typename Fail>
void check_diagnosis(const Diagnosis& d, Fail fail) {
    std::set<std::string> ids;
    bool any_high = false;
    for (std::size_t i = 0; i < d.ranked_findings.size(); ++i) {
        const auto& rf = d.ranked_findings[i];
        const auto p = indexed("$.ranked_findings", i);
        if (!std::isfinite(rf.rank_score)) fail(p + ".rank_score", "non-finite metric");
        if (!in_unit(rf.finding.confidence)) fail(p + ".finding.confidence", "must lie in [0, 1]");
        if (i > 0 && rf.rank_score > d.ranked_findings[i - 1].rank_score) {
            fail(p + ".rank_score", "findings must be sorted by rank_score descending");
        }
        if (!ids.insert(rf.finding.finding_id).second) fail(p + ".finding.finding_id", "duplicate finding id");
        for (std::size_t e = 0; e < rf.finding.evidence.size(); ++e) {
            if (!std::isfinite(rf.finding.evidence[e].value)) {
                fail(indexed(p + ".finding.evidence", e) + ".value", "non-finite metric");
            }
        }
        any_high = any_high || at_least(rf.finding.severity, Severity::high);
    }
    for (std::size_t i = 0; i < d.hypotheses.size(); ++i) {
        const auto& h = d.hypotheses[i];
        const auto p = indexed("$.hypotheses", i);
        if (h.supporting_findings.empty()) fail(p + ".supporting_findings", "must be non-empty");
        for (const auto& id : h.supporting_findings) {
            if (!ids.count(id)) fail(p + ".supporting_findings", "unknown finding '" + id + "'");
        }
        if (!in_unit(h.plausibility)) fail(p + ".plausibility", "must lie in [0, 1]");
    }
    if (any_high && d.actions.empty()) fail("$.actions", "must be non-empty when a finding is high or critical");
    if (!in_unit(d.consensus.agreement)) fail("$.consensus.agreement", "must lie in [0, 1]");
    if (!in_unit(d.consensus.confidence)) fail("$.consensus.confidence", "must lie in [0, 1]");
    if (d.consensus.samples < 0) fail("$.consensus.samples", "must be non-negative");
}

[[noreturn]] void throw_decode(const std::string& path, const std::string& message) {
    throw DecodeError(path, message);
}

[[noreturn]] void throw_encode(const std::string& path, const std::string& message) {
    throw EncodeError(path, message);
}

Json scalar_to_json(const ScalarValue& v) {
    return std::visit([](const auto& x) { return Json(x); }, v);
}

ScalarValue scalar_from_json(const Json& v, const std::string& path) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) return Reader::as_number(v, path);
    if (v.is_string()) return v.get<std::string>();
    throw DecodeError(path, "expected a scalar");
}

}  // namespace

// ---------------------------------------------------------------------------
// to_json

Json to_json(const DatasetSchema& schema) {
    Json cols = Json::array();
    for (const auto& c : schema.columns) cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
    Json j{{"columns", cols}, {"task", to_string(schema.task)}};
    if (schema.label_column) j["label_column"] = *schema.label_column;
    if (schema.index_column) j["index_column"] = *schema.index_column;
    return j;
}

Json to_json(const DatasetStatistics& stats) {
    Json cols = Json::array();
    for (const auto& c : stats.per_column) {
        Json col{{"name", c.name},
                 {"kind", to_string(c.kind)},
                 {"null_fraction", c.null_fraction},
                 {"distinct_count", c.distinct_count}};
        if (c.numeric_summary) {
            const auto& n = *c.numeric_summary;
            col["numeric_summary"] = {{"min", n.min},   {"max", n.max},
                                      {"mean", n.mean}, {"std", n.std},
                                      {"quartiles", {n.q1, n.median, n.q3}}};
        }
        if (!c.top_categories.empty()) {
            Json top = Json::array();
            for (const auto& t : c.top_categories) top.push_back({{"value", t.value}, {"count", t.count}});
            col["top_categories"] = top;
        }
        cols.push_back(col);
    }
    Json j{{"sample_count", stats.sample_count}, {"per_column", cols}};
    if (stats.class_distribution) j["class_distribution"] = *stats.class_distribution;
    return j;
}

Json to_json(const CheckResult& r) {
    return {{"check_id", r.check_id},   {"category", to_string(r.category)},
            {"status", to_string(r.status)}, {"metrics", r.metrics},
            {"condition", r.condition}, {"summary", r.summary},
            {"details", r.details}};
}

Json to_json(const CheckpointMetadata& meta) {
    Json config = Json::object();
    for (const auto& [k, v] : meta.training_config) config[k] = scalar_to_json(v);
    Json j{{"architecture", meta.architecture},
           {"parameter_count", meta.parameter_count},
           {"training_config", config}};
    if (meta.num_classes) j["num_classes"] = *meta.num_classes;
    if (meta.docstring) j["docstring"] = *meta.docstring;
    return j;
}

Json to_json(const PredictionSet& p) {
    Json j{{"dataset_ref", to_string(p.dataset_ref)}};
    if (p.is_regression()) j["predicted_labels"] = p.predicted_values;
    else j["predicted_labels"] = p.predicted_labels;
    if (p.probabilities) j["probabilities"] = *p.probabilities;
    if (p.class_order) j["class_order"] = *p.class_order;
    return j;
}

Json to_json(const ArtifactBundle& b) {
    auto results = [](const std::vector<CheckResult>& list) {
        Json a = Json::array();
        for (const auto& r : list) a.push_back(to_json(r));
        return a;
    };
    Json j{{"bundle_version", b.bundle_version},
           {"modality", b.modality},
           {"created_at", b.created_at},
           {"train_stats", to_json(b.train_stats)},
           {"test_stats", to_json(b.test_stats)},
           {"integrity_results", results(b.integrity_results)},
           {"validation_results", results(b.validation_results)},
           {"evaluation_results", results(b.evaluation_results)},
           {"client_info", b.client_info}};
    if (b.checkpoint) j["checkpoint"] = to_json(*b.checkpoint);
    return j;
}

Json to_json(const Finding& f) {
    Json evidence = Json::array();
    for (const auto& e : f.evidence) {
        evidence.push_back({{"check_id", e.check_id}, {"metric", e.metric}, {"value", e.value}});
    }
    return {{"finding_id", f.finding_id},
            {"source_agent", to_string(f.source_agent)},
            {"severity", to_string(f.severity)},
            {"confidence", f.confidence},
            {"evidence", evidence},
            {"description", f.description}};
}

Json to_json(const Hypothesis& h) {
    return {{"statement", h.statement},
            {"supporting_findings", h.supporting_findings},
            {"kb_citations", h.kb_citations},
            {"plausibility", h.plausibility}};
}

Json to_json(const Diagnosis& d) {
    Json ranked = Json::array();
    for (const auto& rf : d.ranked_findings) {
        ranked.push_back({{"finding", to_json(rf.finding)}, {"rank_score", rf.rank_score}});
    }
    Json hypotheses = Json::array();
    for (const auto& h : d.hypotheses) hypotheses.push_back(to_json(h));
    Json actions = Json::array();
    for (const auto& a : d.actions) {
        actions.push_back(
            {{"action", a.action}, {"rationale", a.rationale}, {"linked_findings", a.linked_findings}});
    }
    return {{"ranked_findings", ranked},
            {"hypotheses", hypotheses},
            {"actions", actions},
            {"summary", d.summary},
            {"consensus",
             {{"samples", d.consensus.samples},
              {"agreement", d.consensus.agreement},
              {"root_cause_category", d.consensus.root_cause_category},
              {"confidence", d.consensus.confidence}}},
            {"degraded", d.degraded}};
}

Json to_json(const LLMRequest& r) {
    Json messages = Json::array();
    for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    Json j{{"messages", messages}, {"temperature", r.temperature}, {"max_tokens", r.max_tokens}};
    if (r.response_format_hint) j["response_format_hint"] = *r.response_format_hint;
    if (r.seed) j["seed"] = *r.seed;
    return j;
}

Json to_json(const LLMResponse& r) {
    return {{"content", r.content},
            {"provider_id", r.provider_id},
            {"usage",
             {{"prompt_tokens", r.usage.prompt_tokens}, {"completion_tokens", r.usage.completion_tokens}}}};
}

// ---------------------------------------------------------------------------
// from_json

DatasetSchema schema_from_json(const Json& json, const std::string& path) {
    Reader r(json, path);
    DatasetSchema s;
    const auto& cols = r.array("columns");
    for (std::size_t i = 0; i < cols.size(); ++i) {
        Reader c(cols[i], indexed(r.child("columns"), i));
        s.columns.push_back({c.string("name"), c.enumeration("kind", parse_column_kind)});
    }
    s.label_column = r.optional_string("label_column");
    s.index_column = r.optional_string("index_column");
    s.task = r.has("task") ? r.enumeration("task", parse_task_type) : TaskType::classification;
    try {
        s.validate();
    } catch (const SchemaError& e) {
        throw DecodeError(path, e.what());
    }
    return s;
}

DatasetStatistics statistics_from_json(const Json& json, const std::string& path) {
    Reader r(json, path);
    DatasetStatistics s;
    s.sample_count = r.integer("sample_count");
    const auto& cols = r.array("per_column");
    for (std::size_t i = 0; i < cols.size(); ++i) {
        Reader c(cols[i], indexed(r.child("per_column"), i));
        ColumnStatistics cs;
        cs.name = c.string("name");
        cs.kind = c.enumeration("kind", parse_column_kind);
        cs.null_fraction = c.number("null_fraction");
        cs.distinct_count = c.integer("distinct_count");
        if (c.has("numeric_summary")) {
            Reader n(c.object("numeric_summary"), c.child("numeric_summary"));
            NumericSummary ns;
            ns.min = n.number("min");
            ns.max = n.number("max");
            ns.mean = n.number("mean");
            ns.std = n.number("std");
            const auto& q = n.array("quartiles");
            require(q.size() == 3, n.child("quartiles"), "expected three quartiles");
            ns.q1 = Reader::as_number(q[0], n.child("quartiles") + "[0]");
            ns.median = Reader::as_number(q[1], n.child("quartiles") + "[1]");
            ns.q3 = Reader::as_number(q[2], n.child("quartiles") + "[2]");
            cs.numeric_summary = ns;
        }
        if (c.has("top_categories")) {
            const auto& top = c.array("top_categories");
            for (std::size_t t = 0; t < top.size(); ++t) {
                Reader tc(top[t], indexed(c.child("top_categories"), t));
                cs.top_categories.push_back({tc.string("value"), tc.integer("count")});
            }
        }
        s.per_column.push_back(std::move(cs));
    }
    if (r.has("class_distribution")) {
        std::map<std::string, std::int64_t> dist;
        for (const auto& [k, v] : r.object("class_distribution").items()) {
            dist[k] = Reader::as_integer(v, r.child("class_distribution") + "." + k);
        }
        s.class_distribution = std::move(dist);
    }
    check_statistics(s, path, throw_decode);
    return s;
}

CheckResult check_result_from_json(const Json& json, const std::string& path) {
    Reader r(json, path);
    CheckResult c;
    c.check_id = r.string("check_id");
    c.category = r.enumeration("category", parse_check_category);
    c.status = r.enumeration("status", parse_check_status);
    c.metrics = r.has("metrics") ? number_map(r.object("metrics"), r.child("metrics")) : std::map<std::string, double>{};
    c.condition = r.has("condition") ? r.string("condition") : "";
    c.summary = r.has("summary") ? r.string("summary") : "";
    c.details = r.has("details") ? number_map(r.object("details"), r.child("details")) : std::map<std::string, double>{};
    return c;
}

CheckpointMetadata checkpoint_from_json(const Json& json, const std::string& path) {
    Reader r(json, path);
    CheckpointMetadata m;
    m.architecture = r.string("architecture");
    m.parameter_count = r.integer("parameter_count");
    require(m.parameter_count >= 0, r.child("parameter_count"), "must be non-negative");
    if (r.has("num_classes")) {
        m.num_classes = r.integer("num_classes");
        require(*m.num_classes >= 2, r.child("num_classes"), "must be at least 2");
    }
    m.docstring = r.optional_string("docstring");
    if (r.has("training_config")) {
        for (const auto& [k, v] : r.object("training_config").items()) {
            m.training_config[k] = scalar_from_json(v, r.child("training_config") + "." + k);
        }
    }
    return m;
}

PredictionSet predictions_from_json(const Json& json, const std::string& path) {
    Reader r(json, path);
    PredictionSet p;
    p.dataset_ref = r.enumeration("dataset_ref", parse_dataset_ref);
    const auto& labels = r.array("predicted_labels");
    const bool numeric = !labels.empty() && labels.front().is_number();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto ep = indexed(r.child("predicted_labels"), i);
        if (numeric) p.predicted_values.push_back(Reader::as_number(labels[i], ep));
        else p.predicted_labels.push_back(Reader::as_string(labels[i], ep));
    }
    if (r.has("class_order")) p.class_order = string_list(r.array("class_order"), r.child("class_order"));
    if (r.has("probabilities")) {
        const auto& rows = r.array("probabilities");
        require(rows.size() == labels.size(), r.child("probabilities"), "row count differs from predicted_labels");
        std::vector<std::vector<double>> matrix;
        matrix.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto rp = indexed(r.child("probabilities"), i);
            require(rows[i].is_array(), rp, "expected an array");
            std::vector<double> row;
            double sum = 0.0;
            for (std::size_t k = 0; k < rows[i].size(); ++k) {
                const double v = Reader::as_number(rows[i][k], indexed(rp, k));
                require(in_unit(v), indexed(rp, k), "probability outside [0, 1]");
                sum += v;
                row.push_back(v);
            }
            require(std::abs(sum - 1.0) <= 1e-6, rp, "probabilities must sum to 1");
            if (p.class_order) require(row.size() == p.class_order->size(), rp, "width differs from class_order");
            matrix.push_back(std::move(row));
        }
        require(p.class_order.has_value(), r.child("class_order"), "required when probabilities are given");
        p.probabilities = std::move(matrix);
    }
    return p;
}

ArtifactBundle bundle_from_json(const Json& json) {
    Reader r(json, "$");
    ArtifactBundle b;
    b.bundle_version = r.string("bundle_version");
    const auto major = b.bundle_version.substr(0, b.bundle_version.find('.'));
    require(major == "1", r.child("bundle_version"), "unsupported major version '" + b.bundle_version + "'");
    b.modality = r.string("modality");
    b.created_at = r.string("created_at");
    b.train_stats = statistics_from_json(r.object("train_stats"), r.child("train_stats"));
    b.test_stats = statistics_from_json(r.object("test_stats"), r.child("test_stats"));
    auto results = [&](std::string_view key) {
        std::vector<CheckResult> out;
        const auto& a = r.array(key);
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(check_result_from_json(a[i], indexed(r.child(key), i)));
        return out;
    };
    b.integrity_results = results("integrity_results");
    b.validation_results = results("validation_results");
    b.evaluation_results = results("evaluation_results");
    if (r.has("checkpoint")) b.checkpoint = checkpoint_from_json(r.object("checkpoint"), r.child("checkpoint"));
    if (r.has("client_info")) {
        for (const auto& [k, v] : r.object("client_info").items()) {
            b.client_info[k] = Reader::as_string(v, r.child("client_info") + "." + k);
        }
    }
    check_bundle(b, throw_decode);
    return b;
}

Finding finding_from_json(const Json& json, const std::string& path) {
    Reader r(json, path);
    Finding f;
    f.finding_id = r.string("finding_id");
    f.source_agent = r.enumeration("source_agent", parse_source_agent);
    f.severity = r.enumeration("severity", parse_severity);
    f.confidence = r.number("confidence");
    require(in_unit(f.confidence), r.child("confidence"), "must lie in [0, 1]");
    const auto& ev = r.array("evidence");
    for (std::size_t i = 0; i < ev.size(); ++i) {
        Reader e(ev[i], indexed(r.child("evidence"), i));
        f.evidence.push_back({e.string("check_id"), e.string("metric"), e.number("value")});
    }
    f.description = r.string("description");
    return f;
}

Hypothesis hypothesis_from_json(const Json& json, const std::string& path) {
    Reader r(json, path);
    Hypothesis h;
    h.statement = r.string("statement");
    h.supporting_findings = string_list(r.array("supporting_findings"), r.child("supporting_findings"));
    h.kb_citations = string_list(r.array("kb_citations"), r.child("kb_citations"));
    h.plausibility = r.number("plausibility");
    return h;
}

Diagnosis diagnosis_from_json(const Json& json) {
    Reader r(json, "$");
    Diagnosis d;
    const auto& ranked = r.array("ranked_findings");
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        Reader rf(ranked[i], indexed(r.child("ranked_findings"), i));
        d.ranked_findings.push_back({finding_from_json(rf.object("finding"), rf.child("finding")), rf.number("rank_score")});
    }
    const auto& hyps = r.array("hypotheses");
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        d.hypotheses.push_back(hypothesis_from_json(hyps[i], indexed(r.child("hypotheses"), i)));
    }
    const auto& actions = r.array("actions");
    for (std::size_t i = 0; i < actions.size(); ++i) {
        Reader a(actions[i], indexed(r.child("actions"), i));
        d.actions.push_back({a.string("action"), a.string("rationale"),
                             string_list(a.array("linked_findings"), a.child("linked_findings"))});
    }
    d.summary = r.string("summary");
    Reader c(r.object("consensus"), r.child("consensus"));
    d.consensus.samples = c.integer("samples");
    d.consensus.agreement = c.number("agreement");
    d.consensus.root_cause_category = c.has("root_cause_category") ? c.string("root_cause_category") : "";
    d.consensus.confidence = c.has("confidence") ? c.number("confidence") : 0.0;
    d.degraded = r.has("degraded") ? r.boolean("degraded") : false;
    check_diagnosis(d, throw_decode);
    return d;
}

LLMRequest request_from_json(const Json& json) {
    Reader r(json, "$");
    LLMRequest q;
    const auto& messages = r.array("messages");
    require(!messages.empty(), r.child("messages"), "must be non-empty");
    for (std::size_t i = 0; i < messages.size(); ++i) {
        Reader m(messages[i], indexed(r.child("messages"), i));
        q.messages.push_back({m.string("role"), m.string("content")});
    }
    q.temperature = r.number("temperature");
    require(q.temperature >= 0.0 && q.temperature <= 2.0, r.child("temperature"), "must lie in [0, 2]");
    q.max_tokens = r.has("max_tokens") ? r.integer("max_tokens") : 1024;
    q.response_format_hint = r.optional_string("response_format_hint");
    if (r.has("seed")) q.seed = r.integer("seed");
    return q;
}

LLMResponse response_from_json(const Json& json) {
    Reader r(json, "$");
    LLMResponse p;
    p.content = r.string("content");
    p.provider_id = r.string("provider_id");
    if (r.has("usage")) {
        Reader u(r.object("usage"), r.child("usage"));
        p.usage.prompt_tokens = u.has("prompt_tokens") ? u.integer("prompt_tokens") : 0;
        p.usage.completion_tokens = u.has("completion_tokens") ? u.integer("completion_tokens") : 0;
    }
    return p;
}

// ---------------------------------------------------------------------------

void validate_bundle(const ArtifactBundle& bundle) { check_bundle(bundle, throw_encode); }
void validate_diagnosis(const Diagnosis& diagnosis) { check_diagnosis(diagnosis, throw_encode); }

std::string canonical_dump(const Json& json) {
    // nlohmann::json objects are std::map-backed, so keys come out sorted and
    // floats are printed in their shortest round-tripping form.
    return json.dump(-1, ' ', false, Json::error_handler_t::strict);
}

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw SyntaxError("$", std::string("malformed JSON: ") + e.what());
    }
}

std::string encode_bundle(const ArtifactBundle& bundle) {
    validate_bundle(bundle);
    return canonical_dump(to_json(bundle));
}

ArtifactBundle decode_bundle(std::string_view bytes) { return bundle_from_json(parse_json(bytes)); }

std::string encode_diagnosis(const Diagnosis& diagnosis) {
    validate_diagnosis(diagnosis);
    return canonical_dump(to_json(diagnosis));
}

Diagnosis decode_diagnosis(std::string_view bytes) { return diagnosis_from_json(parse_json(bytes)); }

std::string encode_schema(const DatasetSchema& schema) { return canonical_dump(to_json(schema)); }

DatasetSchema decode_schema(std::string_view bytes) { return schema_from_json(parse_json(bytes)); }

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

std::string bundle_hash(const ArtifactBundle& bundle) { return sha256_hex(encode_bundle(bundle)); }

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return std::to_string(value);
    return std::string(buf.data(), ptr);
}

}  // namespace mlfix::artifact
