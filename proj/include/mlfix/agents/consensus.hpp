#pragma once

// Self-consistency decoding: sample k completions of one prompt, parse each
// into a fragment, and reduce them by majority vote.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlfix/agents/provider.hpp"

namespace mlfix::agents {

struct ConsensusFragment {
    std::string root_cause_category;
    std::vector<std::string> actions;
    double confidence = 0.0;

    bool operator==(const ConsensusFragment&) const = default;
};

struct ConsensusSample {
    std::string raw;
    std::optional<ConsensusFragment> parsed;  // nullopt marks a parse failure
    int repairs = 0;
};

struct ConsensusResult {
    ConsensusFragment consensus;
    double agreement = 0.0;
    int k = 0;
    int parsed = 0;
    std::vector<ConsensusSample> samples;
};

inline constexpr double kConsensusTemperature = 0.7;
inline constexpr double kProviderConfidence = 0.6;
inline constexpr int kMaxRepairs = 2;

/// Parses {"root_cause_category", "actions", "confidence"}; confidence
/// defaults to kProviderConfidence. nullopt on any schema violation.
std::optional<ConsensusFragment> parse_fragment(const std::string& completion);

/// Majority reduction over the samples (k = samples.size()). Returns nullopt
/// when no sample parsed. Order of the samples never matters.
std::optional<ConsensusResult> reduce_samples(std::vector<ConsensusSample> samples);

/// Issues k completions with seeds seed, seed+1, ... at temperature 0.7,
/// repairing malformed ones up to twice. Provider errors propagate. Returns
/// nullopt when every sample stays unparseable.
std::optional<ConsensusResult> self_consistent_complete(LLMProvider& provider, const LLMRequest& prompt, int k,
                                                        std::int64_t seed);

std::string_view fragment_schema();

/// Lowercase, whitespace collapsed, trailing period dropped.
std::string normalize_action(const std::string& action);

}  // namespace mlfix::agents
