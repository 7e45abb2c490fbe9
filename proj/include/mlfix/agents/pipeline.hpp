#pragma once

// Phase-2 analysis: three analyzers run concurrently over a bundle, their
// findings are correlated into clusters, each cluster gets a KB-grounded
// hypothesis, and a self-consistent synthesis ranks everything into a
// Diagnosis. Rule findings are authoritative; provider output only adds.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlfix/agents/consensus.hpp"
#include "mlfix/agents/provider.hpp"
#include "mlfix/artifact/types.hpp"
#include "mlfix/kb/knowledge_base.hpp"

namespace mlfix::agents {

using artifact::ArtifactBundle;
using artifact::CheckResult;
using artifact::Diagnosis;
using artifact::Finding;
using artifact::Hypothesis;
using artifact::Severity;

inline constexpr double kRuleConfidence = 0.95;
inline constexpr double kImbalanceRatio = 0.1;
inline constexpr double kNullFraction = 0.3;
// Total-variation distance between train and test class distributions.
inline constexpr double kClassDivergence = 0.2;
inline constexpr double kNoMatchPlausibilityCap = 0.5;
inline constexpr std::size_t kHypothesisDocs = 3;

/// Per-run view of the provider. The first failure (or a passed deadline)
/// switches the run to rule-only mode; later calls return nullopt at once.
class ProviderSession {
public:
    ProviderSession(std::shared_ptr<LLMProvider> provider, std::int64_t seed,
                    std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

    /// One completion of `user` under the shared system prompt. nullopt when
    /// the provider is (or just became) unavailable.
    std::optional<std::string> complete(const std::string& user);
    /// complete() plus JSON extraction with up to two repair retries.
    /// nullopt on provider failure or when the output never parses.
    std::optional<nlohmann::json> complete_json(const std::string& user, const std::string& schema);
    /// Self-consistency over the synthesis prompt; nullopt when degraded or
    /// when no sample parses.
    std::optional<ConsensusResult> consensus(const std::string& user, int k);

    bool degraded() const { return failed_.load(); }
    std::string failure() const;
    LLMProvider* provider() const { return provider_.get(); }

private:
    bool usable();
    void fail(const std::string& why);
    LLMRequest request(const std::string& user) const;

    std::shared_ptr<LLMProvider> provider_;
    std::int64_t seed_;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
    std::atomic<bool> failed_{false};
    mutable std::mutex mutex_;
    std::string failure_;
};

// ---------------------------------------------------------------------------
// Analyzers

using Analyzer = std::function<std::vector<Finding>(const ArtifactBundle&, ProviderSession&)>;

/// Severity of a failed or warned check; nullopt for pass/skipped/error.
std::optional<Severity> check_severity(const CheckResult& result);

std::vector<Finding> dataset_rule_findings(const ArtifactBundle& bundle);
std::vector<Finding> check_rule_findings(const ArtifactBundle& bundle);
std::vector<Finding> checkpoint_rule_findings(const ArtifactBundle& bundle);

std::vector<Finding> analyze_dataset(const ArtifactBundle& bundle, ProviderSession& session);
std::vector<Finding> analyze_checks(const ArtifactBundle& bundle, ProviderSession& session);
std::vector<Finding> analyze_checkpoint(const ArtifactBundle& bundle, ProviderSession& session);

/// Parses provider-proposed findings ({"findings": [...]}) for `agent`. Each
/// evidence reference must name a metric present in the bundle (its value
/// is taken from the bundle); findings left without evidence are dropped.
std::vector<Finding> provider_findings(const nlohmann::json& output, artifact::SourceAgent agent,
                                       const ArtifactBundle& bundle);

class AgentRegistry {
public:
    /// Starts with the built-in dataset, checks and checkpoint analyzers.
    AgentRegistry();
    /// Throws std::invalid_argument when the id is empty or already taken.
    void register_agent(std::string id, Analyzer analyzer);
    const std::vector<std::pair<std::string, Analyzer>>& agents() const { return agents_; }

private:
    std::vector<std::pair<std::string, Analyzer>> agents_;
};

// ---------------------------------------------------------------------------
// Reasoner

struct FindingCluster {
    std::string cluster_id;
    std::vector<Finding> members;
    std::string correlation_rule_id;  // R1..R4, shared-evidence, singleton
    std::string narrative;
};

/// Column (or "label") references behind a finding's evidence.
std::set<std::string> evidence_references(const Finding& finding, const ArtifactBundle& bundle);

/// Canonical rules first (R1 invalid split, R2 imbalance-driven
/// underperformance, R3 leakage-inflated evaluation, R4 configuration
/// error), then connected components over shared references. Info findings
/// are not clustered.
std::vector<FindingCluster> aggregate_findings(const std::vector<Finding>& findings, const ArtifactBundle& bundle);

std::string cluster_query(const FindingCluster& cluster);

/// One hypothesis per cluster, in cluster order. Citations are always a
/// subset of the KB hits for cluster_query().
std::vector<Hypothesis> generate_hypotheses(const std::vector<FindingCluster>& clusters, const kb::KnowledgeBase& kb,
                                            ProviderSession& session, const kb::WebSearchClient* web = nullptr);

double rank_score(const Finding& finding);
/// validation < integrity < evaluation; findings without evidence fall back
/// on their agent (dataset -> integrity, others -> evaluation).
int category_rank(const Finding& finding);
/// rank_score descending, then category_rank, then finding_id.
void sort_findings(std::vector<Finding>& findings);

std::string remediation(const FindingCluster& cluster);

/// Assembles the ranked Diagnosis. `consensus` nullopt means the
/// rule-based fallback (samples 0).
Diagnosis rank_diagnosis(const std::vector<Finding>& findings, const std::vector<FindingCluster>& clusters,
                         const std::vector<Hypothesis>& hypotheses, const std::optional<ConsensusResult>& consensus,
                         bool degraded);

struct PipelineOptions {
    int consensus_k = 5;
    std::int64_t seed = 7;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    const kb::WebSearchClient* web = nullptr;
    const AgentRegistry* registry = nullptr;  // nullptr: built-ins only
};

struct PipelineRun {
    Diagnosis diagnosis;
    std::vector<Finding> rule_findings;
    std::vector<FindingCluster> clusters;
    std::optional<ConsensusResult> consensus;
};

/// Never throws for a valid bundle: provider trouble only degrades the run.
PipelineRun run_pipeline_traced(const ArtifactBundle& bundle, std::shared_ptr<LLMProvider> provider,
                                const kb::KnowledgeBase& kb, const PipelineOptions& options = {});
Diagnosis run_pipeline(const ArtifactBundle& bundle, std::shared_ptr<LLMProvider> provider,
                       const kb::KnowledgeBase& kb, const PipelineOptions& options = {});

}  // namespace mlfix::agents
