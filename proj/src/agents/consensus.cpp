#include "mlfix/agents/consensus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "mlfix/agents/structured.hpp"

namespace mlfix::agents {

std::string_view fragment_schema() {
    return R"({"root_cause_category": string, "actions": [string], "confidence": number in [0, 1]})";
}

std::string normalize_action(const std::string& action) {
    std::string out;
    bool space = false;
    for (unsigned char c : action) {
        if (std::isspace(c)) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    while (!out.empty() && out.back() == '.') out.pop_back();
    return out;
}

std::optional<ConsensusFragment> parse_fragment(const std::string& completion) {
    const auto json = extract_json_object(completion);
    if (!json) return std::nullopt;
    const auto cat = json->find("root_cause_category");
    if (cat == json->end() || !cat->is_string() || cat->get<std::string>().empty()) return std::nullopt;
    ConsensusFragment f;
    f.root_cause_category = cat->get<std::string>();
    f.confidence = kProviderConfidence;
    if (const auto c = json->find("confidence"); c != json->end()) {
        if (!c->is_number()) return std::nullopt;
        f.confidence = c->get<double>();
        if (!std::isfinite(f.confidence) || f.confidence < 0.0 || f.confidence > 1.0) return std::nullopt;
    }
    if (const auto a = json->find("actions"); a != json->end()) {
        if (!a->is_array()) return std::nullopt;
        for (const auto& item : *a) {
            if (!item.is_string()) return std::nullopt;
            f.actions.push_back(item.get<std::string>());
        }
    }
    return f;
}

std::optional<ConsensusResult> reduce_samples(std::vector<ConsensusSample> samples) {
    ConsensusResult out;
    out.k = static_cast<int>(samples.size());
    std::map<std::string, int> votes;
    for (const auto& s : samples) {
        if (!s.parsed) continue;
        ++out.parsed;
        ++votes[s.parsed->root_cause_category];
    }
    if (out.parsed == 0) return std::nullopt;

    // std::map iterates lexically, so the first maximum is the smallest tie.
    auto mode = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
        if (it->second > mode->second) mode = it;
    }
    out.consensus.root_cause_category = mode->first;
    out.agreement = static_cast<double>(mode->second) / static_cast<double>(out.parsed);
    // Summed in sorted order so the float result ignores sample order.
    std::vector<double> modal;
    for (const auto& s : samples) {
        if (s.parsed && s.parsed->root_cause_category == mode->first) modal.push_back(s.parsed->confidence);
    }
    std::sort(modal.begin(), modal.end());
    double sum = 0.0;
    for (double c : modal) sum += c;
    out.consensus.confidence = out.agreement * sum / static_cast<double>(mode->second);

    // Count each normalized action once per sample; keep the lexically
    // smallest spelling so the result does not depend on sample order. Ties
    // in frequency go to the action listed earliest within some sample.
    struct Tally {
        int count = 0;
        std::size_t first_pos = 0;
        std::string spelling;
    };
    std::map<std::string, Tally> tally;
    for (const auto& s : samples) {
        if (!s.parsed) continue;
        std::set<std::string> seen;
        std::size_t pos = 0;
        for (const auto& a : s.parsed->actions) {
            auto key = normalize_action(a);
            if (key.empty() || !seen.insert(key).second) continue;
            auto [it, fresh] = tally.try_emplace(key, Tally{0, pos, a});
            ++it->second.count;
            if (!fresh) {
                it->second.first_pos = std::min(it->second.first_pos, pos);
                if (a < it->second.spelling) it->second.spelling = a;
            }
            ++pos;
        }
    }
    const int quorum = (out.k + 1) / 2;
    std::vector<const std::pair<const std::string, Tally>*> kept;
    for (const auto& entry : tally) {
        if (entry.second.count >= quorum) kept.push_back(&entry);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto* a, const auto* b) {
        if (a->second.count != b->second.count) return a->second.count > b->second.count;
        return a->second.first_pos < b->second.first_pos;
    });
    for (const auto* entry : kept) out.consensus.actions.push_back(entry->second.spelling);
    out.samples = std::move(samples);
    return out;
}

std::optional<ConsensusResult> self_consistent_complete(LLMProvider& provider, const LLMRequest& prompt, int k,
                                                        std::int64_t seed) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("k must be a positive odd number");
    std::vector<ConsensusSample> samples;
    for (int i = 0; i < k; ++i) {
        LLMRequest request = prompt;
        request.temperature = kConsensusTemperature;
        request.seed = seed + i;
        ConsensusSample sample;
        sample.raw = provider.complete(request).content;
        sample.parsed = parse_fragment(sample.raw);
        while (!sample.parsed && sample.repairs < kMaxRepairs) {
            ++sample.repairs;
            request.messages.push_back({"assistant", sample.raw});
            request.messages.push_back({"user", prompt_template("repair").render({{"schema", std::string(fragment_schema())}})});
            sample.raw = provider.complete(request).content;
            sample.parsed = parse_fragment(sample.raw);
        }
        samples.push_back(std::move(sample));
    }
    return reduce_samples(std::move(samples));
}

}  // namespace mlfix::agents
