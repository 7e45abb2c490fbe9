#include "mlfix/agents/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <sstream>

#include "mlfix/agents/structured.hpp"
#include "mlfix/artifact/catalog.hpp"
#include "mlfix/artifact/codec.hpp"
#include "playbook.hpp"

namespace mlfix::agents {

using artifact::CheckCategory;
using artifact::CheckStatus;
using artifact::Evidence;
using artifact::Json;
using artifact::SourceAgent;

namespace {

std::string fmt(double v) { return artifact::format_double(v); }

constexpr std::string_view kFindingsSchema =
    R"({"findings": [{"finding_id": string, "severity": "critical"|"high"|"medium"|"low"|"info", )"
    R"("description": string, "confidence": number in [0, 1], "evidence": [{"check_id": string, "metric": string}]}]})";
constexpr std::string_view kHypothesisSchema =
    R"({"statement": string, "plausibility": number in [0, 1], "citations": [doc_id]})";

// ---------------------------------------------------------------------------
// Prompt rendering helpers

std::string stats_text(const artifact::DatasetStatistics& s) {
    std::ostringstream out;
    out << "rows: " << s.sample_count << '\n';
    if (s.class_distribution) {
        out << "classes:";
        for (const auto& [label, n] : *s.class_distribution) out << ' ' << label << '=' << n;
        out << '\n';
    }
    out << "columns:\n";
    for (const auto& c : s.per_column) {
        out << "- " << c.name << " (" << artifact::to_string(c.kind) << "): null_fraction " << fmt(c.null_fraction)
            << ", distinct " << c.distinct_count;
        if (c.numeric_summary) {
            out << ", mean " << fmt(c.numeric_summary->mean) << ", std " << fmt(c.numeric_summary->std);
        }
        out << '\n';
    }
    return out.str();
}

std::string metrics_text(const std::map<std::string, double>& metrics) {
    std::string out;
    for (const auto& [name, value] : metrics) {
        if (!out.empty()) out += ", ";
        out += name + "=" + fmt(value);
    }
    return out;
}

std::string results_text(const ArtifactBundle& bundle) {
    std::ostringstream out;
    for (const auto* r : bundle.all_results()) {
        out << "- " << r->check_id << " [" << artifact::to_string(r->status) << "]: " << r->summary;
        if (!r->metrics.empty()) out << " | " << metrics_text(r->metrics);
        if (!r->condition.empty()) out << " | condition: " << r->condition;
        out << '\n';
    }
    return out.str();
}

std::string findings_text(const std::vector<Finding>& findings) {
    if (findings.empty()) return "(none)\n";
    std::ostringstream out;
    for (const auto& f : findings) {
        out << "- " << f.finding_id << " [" << artifact::to_string(f.severity) << ", confidence "
            << fmt(f.confidence) << "]: " << f.description << '\n';
    }
    return out.str();
}

std::string available_metrics(const ArtifactBundle& bundle) {
    std::ostringstream out;
    for (const auto* r : bundle.all_results()) {
        if (r->metrics.empty()) continue;
        out << "- " << r->check_id << ":";
        for (const auto& [name, v] : r->metrics) out << ' ' << name;
        out << '\n';
    }
    return out.str();
}

std::string checkpoint_text(const ArtifactBundle& bundle) {
    if (!bundle.checkpoint) return "(none)\n";
    const auto& c = *bundle.checkpoint;
    std::ostringstream out;
    out << "architecture: " << c.architecture << "\nparameter_count: " << c.parameter_count << "\nnum_classes: "
        << (c.num_classes ? std::to_string(*c.num_classes) : "unset")
        << "\ndocstring: " << (c.docstring && !c.docstring->empty() ? "present" : "missing") << '\n';
    return out.str();
}

std::string render(std::string_view name, std::map<std::string, std::string> values) {
    return prompt_template(name).render(values);
}

// ---------------------------------------------------------------------------
// Severity and evidence

struct Condition {
    std::string metric;
    bool at_most = true;
    double threshold = 0.0;
};

std::optional<Condition> parse_condition(const std::string& text) {
    for (const auto& [op, at_most] : {std::pair<std::string, bool>{" ≤ ", true}, {" ≥ ", false}, {" == ", true}}) {
        const auto pos = text.find(op);
        if (pos == std::string::npos) continue;
        Condition c;
        c.metric = text.substr(0, pos);
        c.at_most = at_most;
        try {
            std::size_t used = 0;
            const auto rest = text.substr(pos + op.size());
            c.threshold = std::stod(rest, &used);
            if (used != rest.size()) return std::nullopt;
        } catch (const std::exception&) {
            return std::nullopt;
        }
        return c;
    }
    return std::nullopt;
}

// The metric a result's condition is stated on, or its first metric.
std::optional<std::pair<std::string, double>> primary_metric(const CheckResult& r) {
    if (const auto c = parse_condition(r.condition)) {
        if (const auto it = r.metrics.find(c->metric); it != r.metrics.end()) return *it;
    }
    if (r.metrics.empty()) return std::nullopt;
    return *r.metrics.begin();
}

std::vector<Evidence> result_evidence(const CheckResult& r) {
    std::vector<Evidence> out;
    const auto primary = primary_metric(r);
    if (primary) out.push_back({r.check_id, primary->first, primary->second});
    for (const auto& [name, value] : r.metrics) {
        if (!primary || name != primary->first) out.push_back({r.check_id, name, value});
    }
    return out;
}

std::optional<Evidence> metric_evidence(const ArtifactBundle& bundle, std::string_view check_id,
                                        const std::string& metric) {
    const auto* r = bundle.find_result(check_id);
    if (r == nullptr) return std::nullopt;
    const auto it = r->metrics.find(metric);
    if (it == r->metrics.end()) return std::nullopt;
    return Evidence{r->check_id, metric, it->second};
}

Finding rule_finding(std::string id, SourceAgent agent, Severity severity, std::string description,
                     std::vector<Evidence> evidence = {}) {
    Finding f;
    f.finding_id = std::move(id);
    f.source_agent = agent;
    f.severity = severity;
    f.confidence = kRuleConfidence;
    f.evidence = std::move(evidence);
    f.description = std::move(description);
    return f;
}

bool failed(const ArtifactBundle& bundle, std::string_view check_id) {
    const auto* r = bundle.find_result(check_id);
    return r != nullptr && r->status == CheckStatus::fail;
}

std::string strip_period(std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
    return s;
}

std::vector<Finding> with_provider(std::vector<Finding> rules, SourceAgent agent, const ArtifactBundle& bundle,
                                   ProviderSession& session, const std::string& prompt) {
    const auto output = session.complete_json(prompt, std::string(kFindingsSchema));
    if (!output) return rules;
    std::set<std::string> ids;
    for (const auto& f : rules) ids.insert(f.finding_id);
    for (auto& f : provider_findings(*output, agent, bundle)) {
        if (ids.insert(f.finding_id).second) rules.push_back(std::move(f));
    }
    return rules;
}

std::string draft_findings() { return artifact::canonical_dump(Json{{"findings", Json::array()}}); }

// ---------------------------------------------------------------------------
// Clustering support

const std::set<std::string_view> kLabelChecks{"class_imbalance", "conflicting_labels", "new_label", "label_drift"};

bool is_canonical(const FindingCluster& c) {
    return c.correlation_rule_id.size() == 2 && c.correlation_rule_id[0] == 'R';
}

bool rank_before(const Finding& a, const Finding& b) {
    const double sa = rank_score(a);
    const double sb = rank_score(b);
    if (sa != sb) return sa > sb;
    const int ca = category_rank(a);
    const int cb = category_rank(b);
    if (ca != cb) return ca < cb;
    return a.finding_id < b.finding_id;
}

const Finding& lead(const FindingCluster& c) {
    return *std::min_element(c.members.begin(), c.members.end(), rank_before);
}

std::string playbook_key(const FindingCluster& c) { return is_canonical(c) ? c.cluster_id : lead(c).finding_id; }

std::string cluster_category(const FindingCluster& c) {
    if (is_canonical(c)) return c.cluster_id;
    auto id = lead(c).finding_id;
    if (id.rfind("checks.", 0) == 0) id.erase(0, 7);
    return id;
}

Severity max_severity(const std::vector<Finding>& fs) {
    Severity s = Severity::info;
    for (const auto& f : fs) {
        if (at_least(f.severity, s)) s = f.severity;
    }
    return s;
}

// Independent corroborating findings: noisy-or of their confidences.
double combined_confidence(const std::vector<Finding>& fs) {
    double miss = 1.0;
    for (const auto& f : fs) miss *= 1.0 - f.confidence;
    return 1.0 - miss;
}

Finding synthesized_finding(const FindingCluster& c) {
    Finding f;
    f.finding_id = "reasoner." + c.cluster_id;
    f.source_agent = SourceAgent::reasoner;
    f.severity = max_severity(c.members);
    f.confidence = combined_confidence(c.members);
    for (const auto& m : c.members) {
        for (const auto& e : m.evidence) {
            const bool dup = std::any_of(f.evidence.begin(), f.evidence.end(), [&](const Evidence& x) {
                return x.check_id == e.check_id && x.metric == e.metric;
            });
            if (!dup) f.evidence.push_back(e);
        }
    }
    f.description = c.narrative;
    return f;
}

std::optional<Hypothesis> parse_hypothesis(const Json& json, const FindingCluster& cluster,
                                           const std::vector<kb::SearchHit>& hits) {
    const auto st = json.find("statement");
    if (st == json.end() || !st->is_string() || st->get<std::string>().empty()) return std::nullopt;
    Hypothesis h;
    h.statement = st->get<std::string>();
    h.plausibility = kProviderConfidence;
    if (const auto p = json.find("plausibility"); p != json.end()) {
        if (!p->is_number()) return std::nullopt;
        h.plausibility = p->get<double>();
        if (!std::isfinite(h.plausibility) || h.plausibility < 0.0 || h.plausibility > 1.0) return std::nullopt;
    }
    if (const auto c = json.find("citations"); c != json.end()) {
        if (!c->is_array()) return std::nullopt;
        for (const auto& id : *c) {
            if (!id.is_string()) return std::nullopt;
            const auto s = id.get<std::string>();
            const bool retrieved =
                std::any_of(hits.begin(), hits.end(), [&](const kb::SearchHit& hit) { return hit.doc_id == s; });
            if (retrieved && std::find(h.kb_citations.begin(), h.kb_citations.end(), s) == h.kb_citations.end()) {
                h.kb_citations.push_back(s);
            }
        }
    }
    for (const auto& m : cluster.members) h.supporting_findings.push_back(m.finding_id);
    return h;
}

Hypothesis fallback_hypothesis(const FindingCluster& cluster, const std::vector<kb::SearchHit>& hits) {
    const auto& entry = detail::playbook(playbook_key(cluster));
    Hypothesis h;
    h.statement = entry.hypothesis.empty() ? "Likely root cause: " + strip_period(cluster.narrative) + "."
                                           : std::string(entry.hypothesis);
    for (const auto& hit : hits) {
        if (hit.doc_id == entry.doc_id) h.kb_citations.push_back(hit.doc_id);
    }
    if (h.kb_citations.empty() && !hits.empty()) h.kb_citations.push_back(hits.front().doc_id);
    h.plausibility = is_canonical(cluster) ? 0.8 : cluster.correlation_rule_id == "singleton" ? 0.5 : 0.6;
    for (const auto& m : cluster.members) h.supporting_findings.push_back(m.finding_id);
    return h;
}

std::string passages_text(const std::vector<kb::SearchHit>& hits, const kb::KnowledgeBase& index) {
    if (hits.empty()) return "(no matching documents)\n";
    std::ostringstream out;
    for (const auto& h : hits) {
        const auto* doc = index.find(h.doc_id);
        out << "[" << h.doc_id << "] " << (doc ? doc->title : "") << ": " << h.snippet << '\n';
    }
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// ProviderSession

ProviderSession::ProviderSession(std::shared_ptr<LLMProvider> provider, std::int64_t seed,
                                 std::optional<std::chrono::steady_clock::time_point> deadline)
    : provider_(std::move(provider)), seed_(seed), deadline_(deadline) {}

void ProviderSession::fail(const std::string& why) {
    std::lock_guard lock(mutex_);
    if (!failed_.exchange(true)) failure_ = why;
}

std::string ProviderSession::failure() const {
    std::lock_guard lock(mutex_);
    return failure_;
}

bool ProviderSession::usable() {
    if (failed_) return false;
    if (!provider_) {
        fail("no provider configured");
        return false;
    }
    if (deadline_ && std::chrono::steady_clock::now() > *deadline_) {
        fail("provider timeout: request deadline passed");
        return false;
    }
    return true;
}

LLMRequest ProviderSession::request(const std::string& user) const {
    LLMRequest r;
    r.messages = {{"system", render("system", {})}, {"user", user}};
    r.temperature = 0.0;
    r.response_format_hint = "json";
    r.seed = seed_;
    return r;
}

std::optional<std::string> ProviderSession::complete(const std::string& user) {
    if (!usable()) return std::nullopt;
    try {
        return provider_->complete(request(user)).content;
    } catch (const std::exception& e) {
        fail(e.what());
        return std::nullopt;
    }
}

std::optional<Json> ProviderSession::complete_json(const std::string& user, const std::string& schema) {
    if (!usable()) return std::nullopt;
    auto req = request(user);
    try {
        auto raw = provider_->complete(req).content;
        auto json = extract_json_object(raw);
        for (int repair = 0; !json && repair < kMaxRepairs; ++repair) {
            if (!usable()) return std::nullopt;
            req.messages.push_back({"assistant", raw});
            req.messages.push_back({"user", render("repair", {{"schema", schema}})});
            raw = provider_->complete(req).content;
            json = extract_json_object(raw);
        }
        if (json && !json->is_object()) return std::nullopt;
        return json;
    } catch (const std::exception& e) {
        fail(e.what());
        return std::nullopt;
    }
}

std::optional<ConsensusResult> ProviderSession::consensus(const std::string& user, int k) {
    if (!usable()) return std::nullopt;
    try {
        return self_consistent_complete(*provider_, request(user), k, seed_);
    } catch (const ProviderError& e) {
        fail(e.what());
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Analyzers

std::optional<Severity> check_severity(const CheckResult& r) {
    if (r.status == CheckStatus::warn) return Severity::low;
    if (r.status != CheckStatus::fail) return std::nullopt;
    switch (r.category) {
        case CheckCategory::train_test_validation: {
            const auto c = parse_condition(r.condition);
            if (!c) return Severity::high;
            const auto it = r.metrics.find(c->metric);
            if (it == r.metrics.end()) return Severity::high;
            const bool far = c->at_most ? it->second > 3.0 * c->threshold : it->second < c->threshold / 3.0;
            return far ? Severity::critical : Severity::high;
        }
        case CheckCategory::data_integrity:
            if (r.check_id == "conflicting_labels" || r.check_id == "feature_label_correlation") return Severity::high;
            return Severity::medium;
        case CheckCategory::model_evaluation:
            return Severity::medium;
    }
    return Severity::medium;
}

std::vector<Finding> dataset_rule_findings(const ArtifactBundle& bundle) {
    std::vector<Finding> out;
    const auto& train = bundle.train_stats;
    if (train.class_distribution && train.class_distribution->size() >= 2) {
        std::int64_t lo = -1;
        std::int64_t hi = 0;
        for (const auto& [label, n] : *train.class_distribution) {
            lo = lo < 0 ? n : std::min(lo, n);
            hi = std::max(hi, n);
        }
        const double ratio = hi > 0 ? static_cast<double>(lo) / static_cast<double>(hi) : 1.0;
        if (ratio < kImbalanceRatio) {
            std::vector<Evidence> ev;
            if (auto e = metric_evidence(bundle, "class_imbalance", "minority_majority_ratio")) ev.push_back(*e);
            out.push_back(rule_finding("dataset.class_imbalance", SourceAgent::dataset, Severity::high,
                                       "Training classes are severely imbalanced: rarest to most frequent class ratio " +
                                           fmt(ratio) + " is below " + fmt(kImbalanceRatio),
                                       std::move(ev)));
        }
    }

    std::map<std::string, double> sparse;
    for (const auto* stats : {&bundle.train_stats, &bundle.test_stats}) {
        for (const auto& c : stats->per_column) {
            if (c.null_fraction > kNullFraction) sparse[c.name] = std::max(sparse[c.name], c.null_fraction);
        }
    }
    if (!sparse.empty()) {
        std::string cols;
        for (const auto& [name, frac] : sparse) cols += (cols.empty() ? "" : ", ") + name + " (" + fmt(frac) + ")";
        std::vector<Evidence> ev;
        if (auto e = metric_evidence(bundle, "percent_of_nulls", "max_null_fraction")) ev.push_back(*e);
        out.push_back(rule_finding("dataset.high_null_fraction", SourceAgent::dataset, Severity::medium,
                                   "Columns with more than " + fmt(kNullFraction) + " missing values: " + cols,
                                   std::move(ev)));
    }

    const auto& test = bundle.test_stats;
    if (train.class_distribution && test.class_distribution && !train.class_distribution->empty() &&
        !test.class_distribution->empty()) {
        auto total = [](const std::map<std::string, std::int64_t>& m) {
            double t = 0.0;
            for (const auto& [k, n] : m) t += static_cast<double>(n);
            return t;
        };
        const double ta = total(*train.class_distribution);
        const double tb = total(*test.class_distribution);
        std::set<std::string> labels;
        for (const auto& [k, n] : *train.class_distribution) labels.insert(k);
        for (const auto& [k, n] : *test.class_distribution) labels.insert(k);
        double tvd = 0.0;
        for (const auto& label : labels) {
            const auto a = train.class_distribution->count(label) ? train.class_distribution->at(label) : 0;
            const auto b = test.class_distribution->count(label) ? test.class_distribution->at(label) : 0;
            tvd += std::abs(static_cast<double>(a) / ta - static_cast<double>(b) / tb);
        }
        tvd *= 0.5;
        if (ta > 0.0 && tb > 0.0 && tvd > kClassDivergence) {
            std::vector<Evidence> ev;
            if (auto e = metric_evidence(bundle, "label_drift", "cramers_v")) ev.push_back(*e);
            out.push_back(rule_finding("dataset.class_distribution_divergence", SourceAgent::dataset, Severity::high,
                                       "Class distributions of train and test diverge: total variation distance " +
                                           fmt(tvd) + " exceeds " + fmt(kClassDivergence),
                                       std::move(ev)));
        }
    }
    return out;
}

std::vector<Finding> check_rule_findings(const ArtifactBundle& bundle) {
    std::vector<Finding> out;
    for (const auto* r : bundle.all_results()) {
        const auto severity = check_severity(*r);
        if (!severity) continue;
        const auto entry = artifact::find_check(r->check_id);
        std::string description = std::string(entry ? entry->display_name : r->check_id) +
                                  (r->status == CheckStatus::fail ? " failed: " : " warning: ") +
                                  strip_period(r->summary);
        if (const auto p = primary_metric(*r)) {
            description += " (" + std::string(artifact::metric_display_name(p->first)) + " " + fmt(p->second);
            if (!r->condition.empty()) description += ", condition " + r->condition;
            description += ")";
        }
        out.push_back(rule_finding("checks." + r->check_id, SourceAgent::checks, *severity, std::move(description),
                                   result_evidence(*r)));
    }
    return out;
}

std::vector<Finding> checkpoint_rule_findings(const ArtifactBundle& bundle) {
    if (!bundle.checkpoint) {
        return {rule_finding("checkpoint.missing", SourceAgent::checkpoint, Severity::info,
                             "No checkpoint provided; model configuration was not validated")};
    }
    const auto& c = *bundle.checkpoint;
    std::vector<Finding> out;
    if (c.parameter_count == 0) {
        out.push_back(rule_finding("checkpoint.zero_parameters", SourceAgent::checkpoint, Severity::critical,
                                   "Checkpoint reports zero parameters; it is empty or was saved before "
                                   "initialisation"));
    }
    const auto& classes = bundle.train_stats.class_distribution;
    if (c.num_classes && classes && static_cast<std::size_t>(*c.num_classes) != classes->size()) {
        std::vector<Evidence> ev;
        if (auto e = metric_evidence(bundle, "class_imbalance", "class_count")) ev.push_back(*e);
        out.push_back(rule_finding("checkpoint.config_mismatch", SourceAgent::checkpoint, Severity::critical,
                                   "Checkpoint num_classes " + std::to_string(*c.num_classes) + " does not match the " +
                                       std::to_string(classes->size()) + " labels observed in train",
                                   std::move(ev)));
    }
    if (!c.docstring || c.docstring->empty()) {
        out.push_back(rule_finding("checkpoint.missing_docstring", SourceAgent::checkpoint, Severity::info,
                                   "Checkpoint has no docstring describing its training setup"));
    }
    return out;
}

std::vector<Finding> analyze_dataset(const ArtifactBundle& bundle, ProviderSession& session) {
    auto rules = dataset_rule_findings(bundle);
    const auto prompt = render("dataset", {{"train", stats_text(bundle.train_stats)},
                                           {"test", stats_text(bundle.test_stats)},
                                           {"rule_findings", findings_text(rules)},
                                           {"schema", std::string(kFindingsSchema)},
                                           {"available_metrics", available_metrics(bundle)},
                                           {"draft", draft_findings()}});
    return with_provider(std::move(rules), SourceAgent::dataset, bundle, session, prompt);
}

std::vector<Finding> analyze_checks(const ArtifactBundle& bundle, ProviderSession& session) {
    auto rules = check_rule_findings(bundle);
    const auto prompt = render("checks", {{"results", results_text(bundle)},
                                          {"rule_findings", findings_text(rules)},
                                          {"schema", std::string(kFindingsSchema)},
                                          {"available_metrics", available_metrics(bundle)},
                                          {"draft", draft_findings()}});
    return with_provider(std::move(rules), SourceAgent::checks, bundle, session, prompt);
}

std::vector<Finding> analyze_checkpoint(const ArtifactBundle& bundle, ProviderSession& session) {
    auto rules = checkpoint_rule_findings(bundle);
    if (!bundle.checkpoint) return rules;
    std::string classes = "(unknown)";
    if (const auto& d = bundle.train_stats.class_distribution) {
        classes = std::to_string(d->size()) + " labels";
    }
    const auto prompt = render("checkpoint", {{"checkpoint", checkpoint_text(bundle)},
                                              {"classes", classes},
                                              {"rule_findings", findings_text(rules)},
                                              {"schema", std::string(kFindingsSchema)},
                                              {"available_metrics", available_metrics(bundle)},
                                              {"draft", draft_findings()}});
    return with_provider(std::move(rules), SourceAgent::checkpoint, bundle, session, prompt);
}

std::vector<Finding> provider_findings(const Json& output, SourceAgent agent, const ArtifactBundle& bundle) {
    std::vector<Finding> out;
    const auto list = output.find("findings");
    if (list == output.end() || !list->is_array()) return out;
    const std::string prefix = std::string(artifact::to_string(agent)) + ".llm.";
    for (std::size_t i = 0; i < list->size(); ++i) {
        const auto& item = (*list)[i];
        if (!item.is_object()) continue;
        const auto sev = item.find("severity");
        const auto desc = item.find("description");
        if (sev == item.end() || !sev->is_string() || desc == item.end() || !desc->is_string()) continue;
        const auto severity = artifact::parse_severity(sev->get<std::string>());
        if (!severity || desc->get<std::string>().empty()) continue;
        Finding f;
        f.source_agent = agent;
        f.severity = *severity;
        f.description = desc->get<std::string>();
        f.confidence = kProviderConfidence;
        if (const auto c = item.find("confidence"); c != item.end() && c->is_number()) {
            const double v = c->get<double>();
            if (std::isfinite(v) && v >= 0.0 && v <= 1.0) f.confidence = v;
        }
        std::string local = "finding" + std::to_string(i + 1);
        if (const auto id = item.find("finding_id"); id != item.end() && id->is_string()) {
            std::string clean;
            for (char ch : id->get<std::string>()) {
                if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') clean.push_back(ch);
            }
            if (!clean.empty()) local = clean;
        }
        f.finding_id = prefix + local;
        if (const auto ev = item.find("evidence"); ev != item.end() && ev->is_array()) {
            for (const auto& e : *ev) {
                if (!e.is_object() || !e.contains("check_id") || !e.contains("metric")) continue;
                if (!e["check_id"].is_string() || !e["metric"].is_string()) continue;
                if (auto found = metric_evidence(bundle, e["check_id"].get<std::string>(),
                                                 e["metric"].get<std::string>())) {
                    f.evidence.push_back(*found);
                }
            }
        }
        if (!f.evidence.empty()) out.push_back(std::move(f));
    }
    return out;
}

AgentRegistry::AgentRegistry() {
    agents_.emplace_back("dataset", analyze_dataset);
    agents_.emplace_back("checks", analyze_checks);
    agents_.emplace_back("checkpoint", analyze_checkpoint);
}

void AgentRegistry::register_agent(std::string id, Analyzer analyzer) {
    if (id.empty()) throw std::invalid_argument("agent id must not be empty");
    if (!analyzer) throw std::invalid_argument("agent " + id + " has no analyzer");
    for (const auto& [existing, fn] : agents_) {
        if (existing == id) throw std::invalid_argument("agent id already registered: " + id);
    }
    agents_.emplace_back(std::move(id), std::move(analyzer));
}

// ---------------------------------------------------------------------------
// Aggregation

std::set<std::string> evidence_references(const Finding& finding, const ArtifactBundle& bundle) {
    std::set<std::string> columns;
    for (const auto& c : bundle.train_stats.per_column) columns.insert(c.name);
    std::set<std::string> out;
    auto add_column = [&](const std::string& name) {
        if (columns.count(name)) out.insert(name);
    };
    for (const auto& e : finding.evidence) {
        if (kLabelChecks.count(e.check_id)) out.insert("label");
        const auto* r = bundle.find_result(e.check_id);
        if (r == nullptr) continue;
        for (const auto& [key, value] : r->details) {
            if (const auto bar = key.find('|'); bar != std::string::npos) {
                add_column(key.substr(0, bar));
                add_column(key.substr(bar + 1));
            } else if (key.rfind("class=", 0) == 0) {
                out.insert("label");
            } else if (const auto cut = key.find_first_of("=["); cut != std::string::npos) {
                add_column(key.substr(0, cut));
            } else {
                add_column(key);
            }
        }
    }
    return out;
}

std::vector<FindingCluster> aggregate_findings(const std::vector<Finding>& findings, const ArtifactBundle& bundle) {
    std::vector<const Finding*> pool;
    for (const auto& f : findings) {
        if (f.severity != Severity::info) pool.push_back(&f);
    }
    std::vector<bool> used(pool.size(), false);
    auto index_of = [&](std::string_view id) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!used[i] && pool[i]->finding_id == id) return i;
        }
        return std::nullopt;
    };
    auto failed_check = [&](std::string_view check_id) {
        return failed(bundle, check_id) && index_of("checks." + std::string(check_id)).has_value();
    };

    std::vector<FindingCluster> out;
    auto emit = [&](std::string id, std::string rule, std::string narrative, std::vector<std::string_view> ids) {
        FindingCluster c{std::move(id), {}, std::move(rule), std::move(narrative)};
        std::vector<std::size_t> picked;
        for (auto fid : ids) {
            if (auto i = index_of(fid)) picked.push_back(*i);
        }
        std::sort(picked.begin(), picked.end());
        for (auto i : picked) {
            used[i] = true;
            c.members.push_back(*pool[i]);
        }
        out.push_back(std::move(c));
    };

    // R1: a label distribution shift plus labels the model never saw.
    if (failed_check("label_drift") && failed_check("new_label")) {
        emit("invalid-split", "R1",
             "Invalid split: the test label distribution diverges from train and includes labels never seen in "
             "training",
             {"checks.label_drift", "checks.new_label", "dataset.class_distribution_divergence"});
    }

    // R2: imbalance plus weak segments on a minority class.
    const bool imbalance = failed_check("class_imbalance") || index_of("dataset.class_imbalance").has_value();
    if (imbalance && failed_check("weak_segments_performance")) {
        bool minority_weak = false;
        if (const auto& dist = bundle.train_stats.class_distribution) {
            std::int64_t top = 0;
            for (const auto& [label, n] : *dist) top = std::max(top, n);
            for (const auto& [key, acc] : bundle.find_result("weak_segments_performance")->details) {
                if (key.rfind("class=", 0) != 0) continue;
                const auto it = dist->find(key.substr(6));
                if (it != dist->end() && 2 * it->second < top) minority_weak = true;
            }
        }
        if (minority_weak) {
            emit("imbalance-driven-underperformance", "R2",
                 "Imbalance-driven underperformance: minority classes are rare in training and the model "
                 "underperforms on them",
                 {"checks.class_imbalance", "dataset.class_imbalance", "checks.weak_segments_performance"});
        }
    }

    // R3: train/test overlap plus a train-test performance gap.
    if ((failed_check("train_test_samples_mix") || failed_check("index_leakage")) &&
        failed_check("train_test_performance")) {
        emit("leakage-inflated-evaluation", "R3",
             "Leakage-inflated evaluation: test rows overlap with train while the train-test performance gap is "
             "suspicious",
             {"checks.train_test_samples_mix", "checks.index_leakage", "checks.train_test_performance"});
    }

    // R4: checkpoint/data mismatch plus failing evaluation checks.
    if (index_of("checkpoint.config_mismatch")) {
        std::vector<std::string> eval_ids;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const auto& id = pool[i]->finding_id;
            if (used[i] || id.rfind("checks.", 0) != 0) continue;
            const auto entry = artifact::find_check(std::string_view(id).substr(7));
            if (entry && entry->category == CheckCategory::model_evaluation && failed(bundle, entry->id)) {
                eval_ids.push_back(id);
            }
        }
        if (!eval_ids.empty()) {
            std::vector<std::string_view> ids{"checkpoint.config_mismatch"};
            for (const auto& id : eval_ids) ids.push_back(id);
            emit("configuration-error", "R4",
                 "Configuration error: the checkpoint configuration does not match the data and evaluation checks "
                 "fail",
                 ids);
        }
    }

    // Remaining findings: connected components over shared references.
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!used[i]) rest.push_back(i);
    }
    std::vector<std::set<std::string>> refs;
    for (auto i : rest) refs.push_back(evidence_references(*pool[i], bundle));
    std::vector<std::size_t> parent(rest.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = root(parent[x]);
    };
    for (std::size_t a = 0; a < rest.size(); ++a) {
        for (std::size_t b = a + 1; b < rest.size(); ++b) {
            const bool shared = std::any_of(refs[a].begin(), refs[a].end(),
                                            [&](const std::string& r) { return refs[b].count(r) > 0; });
            if (shared) parent[std::max(root(a), root(b))] = std::min(root(a), root(b));
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t a = 0; a < rest.size(); ++a) components[root(a)].push_back(a);
    for (const auto& [r, members] : components) {
        FindingCluster c;
        for (auto m : members) c.members.push_back(*pool[rest[m]]);
        if (members.size() == 1) {
            c.cluster_id = c.members.front().finding_id;
            c.correlation_rule_id = "singleton";
            c.narrative = c.members.front().description;
        } else {
            std::set<std::string> common;
            for (auto m : members) {
                for (const auto& ref : refs[m]) {
                    std::size_t holders = 0;
                    for (auto o : members) holders += refs[o].count(ref);
                    if (holders > 1) common.insert(ref);
                }
            }
            std::string names;
            for (const auto& ref : common) names += (names.empty() ? "" : ", ") + ref;
            c.cluster_id = "shared:" + c.members.front().finding_id;
            c.correlation_rule_id = "shared-evidence";
            c.narrative = "Findings sharing " + names + ": ";
            for (std::size_t i = 0; i < c.members.size(); ++i) {
                c.narrative += (i ? "; " : "") + strip_period(c.members[i].description);
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hypotheses

std::string cluster_query(const FindingCluster& cluster) {
    std::string q = cluster.narrative;
    std::set<std::string> checks;
    for (const auto& m : cluster.members) {
        q += " " + m.finding_id;
        for (const auto& e : m.evidence) checks.insert(e.check_id);
    }
    for (const auto& c : checks) q += " " + c;
    return q;
}

std::vector<Hypothesis> generate_hypotheses(const std::vector<FindingCluster>& clusters, const kb::KnowledgeBase& kb,
                                            ProviderSession& session, const kb::WebSearchClient* web) {
    std::vector<Hypothesis> out;
    for (const auto& cluster : clusters) {
        const auto query = cluster_query(cluster);
        std::optional<kb::KnowledgeBase> session_kb;
        if (web != nullptr) {
            auto docs = web->search(query);
            if (!docs.empty()) session_kb = kb.merged_with(docs);
        }
        const auto& index = session_kb ? *session_kb : kb;
        const auto hits = index.search(query, kHypothesisDocs);
        auto hypothesis = fallback_hypothesis(cluster, hits);

        std::string findings;
        for (const auto& m : cluster.members) {
            findings += "- " + m.finding_id + " [" + std::string(artifact::to_string(m.severity)) + "]: " +
                        m.description + "\n";
        }
        Json draft = {{"statement", hypothesis.statement},
                      {"plausibility", hypothesis.plausibility},
                      {"citations", hypothesis.kb_citations}};
        const auto prompt = render("hypothesis", {{"cluster_id", cluster.cluster_id},
                                                  {"rule", cluster.correlation_rule_id},
                                                  {"narrative", cluster.narrative},
                                                  {"findings", findings},
                                                  {"passages", passages_text(hits, index)},
                                                  {"schema", std::string(kHypothesisSchema)},
                                                  {"draft", artifact::canonical_dump(draft)}});
        if (const auto json = session.complete_json(prompt, std::string(kHypothesisSchema))) {
            if (auto parsed = parse_hypothesis(*json, cluster, hits)) hypothesis = std::move(*parsed);
        }
        if (hits.empty()) hypothesis.plausibility = std::min(hypothesis.plausibility, kNoMatchPlausibilityCap);
        out.push_back(std::move(hypothesis));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ranking

double rank_score(const Finding& finding) {
    return artifact::severity_weight(finding.severity) * finding.confidence;
}

int category_rank(const Finding& finding) {
    for (const auto& e : finding.evidence) {
        if (const auto entry = artifact::find_check(e.check_id)) {
            switch (entry->category) {
                case CheckCategory::train_test_validation: return 0;
                case CheckCategory::data_integrity: return 1;
                case CheckCategory::model_evaluation: return 2;
            }
        }
    }
    return finding.source_agent == SourceAgent::dataset ? 1 : 2;
}

void sort_findings(std::vector<Finding>& findings) { std::sort(findings.begin(), findings.end(), rank_before); }

std::string remediation(const FindingCluster& cluster) {
    return std::string(detail::playbook(playbook_key(cluster)).remediation);
}

Diagnosis rank_diagnosis(const std::vector<Finding>& findings, const std::vector<FindingCluster>& clusters,
                         const std::vector<Hypothesis>& hypotheses, const std::optional<ConsensusResult>& consensus,
                         bool degraded) {
    std::vector<Finding> all = findings;
    std::vector<std::vector<std::string>> links(clusters.size());
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (is_canonical(clusters[i]) && !clusters[i].members.empty()) {
            auto synth = synthesized_finding(clusters[i]);
            links[i].push_back(synth.finding_id);
            all.push_back(std::move(synth));
        }
        for (const auto& m : clusters[i].members) links[i].push_back(m.finding_id);
    }
    sort_findings(all);

    Diagnosis d;
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < all.size(); ++i) {
        position.emplace(all[i].finding_id, i);
        d.ranked_findings.push_back({all[i], rank_score(all[i])});
    }

    std::vector<std::size_t> order(clusters.size());
    std::iota(order.begin(), order.end(), 0);
    auto best = [&](std::size_t c) {
        std::size_t p = all.size();
        for (const auto& id : links[c]) p = std::min(p, position.at(id));
        return p;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best(a) < best(b); });

    for (auto c : order) {
        const auto text = remediation(clusters[c]);
        auto existing = std::find_if(d.actions.begin(), d.actions.end(), [&](const artifact::Action& a) {
            return normalize_action(a.action) == normalize_action(text);
        });
        if (existing != d.actions.end()) {
            for (const auto& id : links[c]) existing->linked_findings.push_back(id);
            continue;
        }
        artifact::Action a;
        a.action = text;
        a.rationale = c < hypotheses.size() ? hypotheses[c].statement : clusters[c].narrative;
        a.linked_findings = links[c];
        d.actions.push_back(std::move(a));
    }
    if (consensus) {
        for (const auto& text : consensus->consensus.actions) {
            const bool known = std::any_of(d.actions.begin(), d.actions.end(), [&](const artifact::Action& a) {
                return normalize_action(a.action) == normalize_action(text);
            });
            if (known) continue;
            artifact::Action a;
            a.action = text;
            a.rationale = "Proposed by the synthesis consensus (agreement " + fmt(consensus->agreement) + ")";
            if (!order.empty()) a.linked_findings = links[order.front()];
            d.actions.push_back(std::move(a));
        }
    }
    if (d.actions.empty()) {
        d.actions.push_back({"No action required: no significant issues detected",
                             "Every check passed or produced only informational findings.", {}});
    }

    for (auto c : order) {
        if (c >= hypotheses.size()) continue;
        auto h = hypotheses[c];
        h.supporting_findings = links[c];
        d.hypotheses.push_back(std::move(h));
    }

    for (const auto& rf : d.ranked_findings) {
        if (rf.finding.severity == Severity::info) continue;
        if (!d.summary.empty()) d.summary += " ";
        auto sev = std::string(artifact::to_string(rf.finding.severity));
        sev[0] = static_cast<char>(sev[0] - 'a' + 'A');
        d.summary += sev + ": " + strip_period(rf.finding.description) + ".";
    }
    if (d.summary.empty()) d.summary = "No significant issues detected.";

    const std::string fallback_category = order.empty() ? "none" : cluster_category(clusters[order.front()]);
    if (consensus) {
        d.consensus.samples = consensus->k;
        d.consensus.agreement = consensus->agreement;
        d.consensus.root_cause_category = consensus->consensus.root_cause_category;
        d.consensus.confidence = consensus->consensus.confidence;
    } else {
        d.consensus.samples = 0;
        d.consensus.agreement = 0.0;
        d.consensus.root_cause_category = fallback_category;
        d.consensus.confidence = 0.0;
    }
    d.degraded = degraded || !consensus;
    return d;
}

// ---------------------------------------------------------------------------
// Pipeline

PipelineRun run_pipeline_traced(const ArtifactBundle& bundle, std::shared_ptr<LLMProvider> provider,
                                const kb::KnowledgeBase& kb, const PipelineOptions& options) {
    static const AgentRegistry builtin;
    const auto& registry = options.registry ? *options.registry : builtin;
    ProviderSession session(std::move(provider), options.seed, options.deadline);

    PipelineRun run;
    for (auto* rules : {&dataset_rule_findings, &check_rule_findings, &checkpoint_rule_findings}) {
        for (auto& f : (*rules)(bundle)) run.rule_findings.push_back(std::move(f));
    }

    std::vector<std::future<std::vector<Finding>>> jobs;
    for (const auto& [id, analyzer] : registry.agents()) {
        jobs.push_back(std::async(std::launch::async, [&bundle, &session, fn = analyzer] { return fn(bundle, session); }));
    }
    std::atomic<bool> agent_failed{false};
    std::vector<Finding> findings;
    std::set<std::string> ids;
    for (auto& job : jobs) {
        std::vector<Finding> out;
        try {
            out = job.get();
        } catch (const std::exception&) {
            agent_failed = true;
        }
        for (auto& f : out) {
            // Evidence closure: keep only references into this bundle.
            std::erase_if(f.evidence, [&](const Evidence& e) { return bundle.find_result(e.check_id) == nullptr; });
            if (ids.insert(f.finding_id).second) findings.push_back(std::move(f));
        }
    }

    run.clusters = aggregate_findings(findings, bundle);
    const auto hypotheses = generate_hypotheses(run.clusters, kb, session, options.web);

    // A rule-only pass gives the draft that the synthesis prompt asks the
    // provider to confirm or revise.
    const auto draft = rank_diagnosis(findings, run.clusters, hypotheses, std::nullopt, false);
    std::string clusters_text;
    std::set<std::string> categories{"none"};
    for (const auto& c : run.clusters) {
        categories.insert(cluster_category(c));
        clusters_text += "- " + c.cluster_id + " [" + c.correlation_rule_id + ", " +
                         std::string(artifact::to_string(max_severity(c.members))) + "]: " + c.narrative + "\n";
    }
    std::string hypotheses_text;
    for (const auto& h : draft.hypotheses) {
        hypotheses_text += "- " + h.statement + " (plausibility " + fmt(h.plausibility) + ")\n";
    }
    std::string category_list;
    for (const auto& c : categories) category_list += (category_list.empty() ? "" : ", ") + c;
    Json draft_json = {{"root_cause_category", draft.consensus.root_cause_category},
                       {"actions", Json::array()},
                       {"confidence", draft.ranked_findings.empty() ? 1.0 : draft.ranked_findings.front().finding.confidence}};
    for (const auto& a : draft.actions) draft_json["actions"].push_back(a.action);
    const auto prompt = render("synthesis", {{"clusters", clusters_text.empty() ? "(none)\n" : clusters_text},
                                             {"hypotheses", hypotheses_text.empty() ? "(none)\n" : hypotheses_text},
                                             {"schema", std::string(fragment_schema())},
                                             {"categories", category_list},
                                             {"draft", artifact::canonical_dump(draft_json)}});
    run.consensus = session.consensus(prompt, options.consensus_k);

    run.diagnosis =
        rank_diagnosis(findings, run.clusters, hypotheses, run.consensus, session.degraded() || agent_failed);
    return run;
}

Diagnosis run_pipeline(const ArtifactBundle& bundle, std::shared_ptr<LLMProvider> provider,
                       const kb::KnowledgeBase& kb, const PipelineOptions& options) {
    return run_pipeline_traced(bundle, std::move(provider), kb, options).diagnosis;
}

}  // namespace mlfix::agents
