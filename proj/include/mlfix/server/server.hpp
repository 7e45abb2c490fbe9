#pragma once

// Phase-2 HTTP entry point. AnalysisService holds everything that does not
// depend on sockets (cache, counters, health probe) so it can be tested
// directly; HttpServer maps it onto /analyze, /healthz and /metrics.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mlfix/agents/pipeline.hpp"
#include "mlfix/agents/provider.hpp"
#include "mlfix/kb/knowledge_base.hpp"

namespace httplib {
class Server;
}

namespace mlfix::server {

inline constexpr std::size_t kMaxBodyBytes = 32u * 1024u * 1024u;

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    agents::ProviderSettings provider;
    std::optional<std::filesystem::path> kb_path;
    std::size_t cache_capacity = 256;  // 0 disables
    int consensus_k = 5;
    int request_timeout_secs = 120;
    std::int64_t seed = 7;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ConfigError when an invariant does not hold.
void validate(const ServerConfig& config);
/// Reads a JSON config file (every key optional), then applies the
/// MLFIX_LLM_* and MLFIX_KB_PATH environment overrides.
ServerConfig load_config(const std::optional<std::filesystem::path>& path);
ServerConfig config_from_json(const nlohmann::json& json);

/// Bounded LRU from bundle hash to encoded diagnosis bytes. Storing bytes
/// keeps cached responses byte-identical to the original one.
class DiagnosisCache {
public:
    explicit DiagnosisCache(std::size_t capacity) : capacity_(capacity) {}

    std::optional<std::string> get(const std::string& key);
    void put(const std::string& key, std::string value);
    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }

private:
    using Entry = std::pair<std::string, std::string>;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<Entry> order_;  // front = most recently used
    std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

struct MetricsSnapshot {
    std::uint64_t requests_total = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t analyses_completed = 0;
    double mean_diagnosis_seconds = 0.0;
};

std::string render_metrics(const MetricsSnapshot& m);

struct AnalyzeResponse {
    int status = 200;
    std::string body;
    std::string cache;  // "hit" | "miss" | "" for errors
};

class AnalysisService {
public:
    using Clock = std::chrono::steady_clock;
    using Log = std::function<void(const std::string&)>;

    AnalysisService(ServerConfig config, std::shared_ptr<agents::LLMProvider> provider, kb::KnowledgeBase kb);

    /// Never throws. 400 for non-JSON, 422 with the offending field path
    /// for contract violations, otherwise 200 with a Diagnosis; provider
    /// trouble yields a degraded diagnosis, which is not cached.
    AnalyzeResponse analyze(std::string_view body);
    nlohmann::json health();
    MetricsSnapshot metrics() const;

    const ServerConfig& config() const { return config_; }
    const kb::KnowledgeBase& knowledge_base() const { return kb_; }
    /// Receives one line per event; never bundle contents.
    void set_log(Log log) { log_ = std::move(log); }
    /// Overrides the health-probe clock (tests).
    void set_clock(std::function<Clock::time_point()> now) { now_ = std::move(now); }

private:
    void log(const std::string& line) const;

    ServerConfig config_;
    std::shared_ptr<agents::LLMProvider> provider_;
    kb::KnowledgeBase kb_;
    DiagnosisCache cache_;
    Log log_;
    std::function<Clock::time_point()> now_;

    std::atomic<std::uint64_t> requests_{0};
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    mutable std::mutex stats_mutex_;
    std::uint64_t completed_ = 0;
    double total_seconds_ = 0.0;

    std::mutex probe_mutex_;
    std::optional<Clock::time_point> probed_at_;
    bool reachable_ = false;
};

class HttpServer {
public:
    explicit HttpServer(AnalysisService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds `host:port` (port 0 picks a free one) and returns the bound
    /// port. Throws std::runtime_error when binding fails.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    void listen();
    void stop();

private:
    AnalysisService& service_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace mlfix::server
