#pragma once

#include <atomic>
#include <functional>
#include <string>

#include "mlfix/agents/provider.hpp"

namespace mlfix::testing {

class FailingProvider : public agents::LLMProvider {
public:
    artifact::LLMResponse complete(const artifact::LLMRequest&) override {
        ++calls;
        throw agents::ProviderError("connection refused");
    }
    std::string id() const override { return "failing"; }
    bool reachable(std::chrono::milliseconds) override { return false; }

    std::atomic<int> calls{0};
};

/// Answers through a callback; handy for per-seed scripted samples.
class LambdaProvider : public agents::LLMProvider {
public:
    explicit LambdaProvider(std::function<std::string(const artifact::LLMRequest&)> fn) : fn_(std::move(fn)) {}
    artifact::LLMResponse complete(const artifact::LLMRequest& request) override {
        ++calls;
        return {fn_(request), "lambda", {}};
    }
    std::string id() const override { return "lambda"; }

    std::atomic<int> calls{0};

private:
    std::function<std::string(const artifact::LLMRequest&)> fn_;
};

inline std::string last_user(const artifact::LLMRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == "user") return it->content;
    }
    return {};
}

}  // namespace mlfix::testing
