#pragma once

// Chat-completion providers. Every implementation must tolerate concurrent
// complete() calls from several analyzer threads.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlfix/artifact/types.hpp"

namespace mlfix::agents {

using artifact::LLMRequest;
using artifact::LLMResponse;

/// The provider could not produce a completion (after retries).
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProviderTimeout : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// Scripted stub asked for a prompt its fixture does not cover.
class FixtureMiss : public ProviderError {
public:
    explicit FixtureMiss(std::string hash)
        : ProviderError("no fixture for prompt hash " + hash), hash_(std::move(hash)) {}
    const std::string& hash() const { return hash_; }

private:
    std::string hash_;
};

class LLMProvider {
public:
    virtual ~LLMProvider() = default;
    virtual LLMResponse complete(const LLMRequest& request) = 0;
    virtual std::string id() const = 0;
    /// Cheap liveness probe; must return within `timeout`.
    virtual bool reachable(std::chrono::milliseconds timeout) { return (void)timeout, true; }
};

/// SHA-256 over the canonical JSON of the messages and the seed. Temperature
/// and token limits are deliberately left out.
std::string prompt_hash(const LLMRequest& request);

/// Replays completions from a map prompt-hash -> completion.
class ScriptedProvider : public LLMProvider {
public:
    explicit ScriptedProvider(std::map<std::string, std::string> fixtures);
    static std::shared_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);

    LLMResponse complete(const LLMRequest& request) override;
    std::string id() const override { return "scripted"; }

private:
    std::map<std::string, std::string> fixtures_;
};

/// Offline default. Prompts carry a rule-derived draft answer between
/// <draft> and </draft>; this provider confirms the last draft verbatim.
class EchoProvider : public LLMProvider {
public:
    LLMResponse complete(const LLMRequest& request) override;
    std::string id() const override { return "echo"; }
};

/// Wraps another provider and remembers every prompt-hash -> completion pair,
/// producing fixture files for ScriptedProvider.
class RecordingProvider : public LLMProvider {
public:
    explicit RecordingProvider(std::shared_ptr<LLMProvider> inner) : inner_(std::move(inner)) {}

    LLMResponse complete(const LLMRequest& request) override;
    std::string id() const override { return inner_->id(); }
    bool reachable(std::chrono::milliseconds timeout) override { return inner_->reachable(timeout); }

    std::map<std::string, std::string> recorded() const;
    void save(const std::filesystem::path& path) const;

private:
    std::shared_ptr<LLMProvider> inner_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> recorded_;
};

struct HttpProviderConfig {
    std::string endpoint;  // full URL of the chat-completions route
    std::string api_key;
    std::string model = "default";
    std::chrono::milliseconds call_timeout{30000};
    int max_attempts = 3;
    std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(1000), std::chrono::milliseconds(2000),
                                                   std::chrono::milliseconds(4000)};
};

/// Generic messages/choices chat-completion client.
class HttpChatProvider : public LLMProvider {
public:
    explicit HttpChatProvider(HttpProviderConfig config);

    LLMResponse complete(const LLMRequest& request) override;
    std::string id() const override { return "http"; }
    bool reachable(std::chrono::milliseconds timeout) override;

private:
    HttpProviderConfig config_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
};

struct ProviderSettings {
    std::string kind = "echo";  // echo | scripted | http
    std::optional<std::filesystem::path> fixtures;
    HttpProviderConfig http;
};

/// Fills http.endpoint and http.api_key from MLFIX_LLM_ENDPOINT and
/// MLFIX_LLM_API_KEY when those are set.
void apply_provider_env(ProviderSettings& settings);

/// Throws std::invalid_argument for an unknown kind or missing fixture path.
std::shared_ptr<LLMProvider> make_provider(const ProviderSettings& settings);

}  // namespace mlfix::agents
