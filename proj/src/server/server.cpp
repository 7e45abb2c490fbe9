#include "mlfix/server/server.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <httplib.h>

#include "mlfix/artifact/codec.hpp"

namespace mlfix::server {

namespace {

using artifact::Json;

std::string error_body(const std::string& message, const std::string& path = "") {
    Json j = {{"error", message}};
    if (!path.empty()) j["path"] = path;
    return artifact::canonical_dump(j);
}

double seconds_since(AnalysisService::Clock::time_point start) {
    return std::chrono::duration<double>(AnalysisService::Clock::now() - start).count();
}

template <typename T>
T field(const Json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("config field ") + key + " has the wrong type");
    }
}

}  // namespace

void validate(const ServerConfig& c) {
    if (c.consensus_k < 1 || c.consensus_k % 2 == 0) throw ConfigError("consensus_k must be a positive odd number");
    if (c.request_timeout_secs <= 0) throw ConfigError("request_timeout_secs must be positive");
    if (c.port < 0 || c.port > 65535) throw ConfigError("port out of range");
    if (c.provider.kind != "echo" && c.provider.kind != "scripted" && c.provider.kind != "http") {
        throw ConfigError("unknown provider kind: " + c.provider.kind);
    }
}

ServerConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ServerConfig c;
    c.host = field(j, "host", c.host);
    c.port = field(j, "port", c.port);
    const auto capacity = field<std::int64_t>(j, "cache_capacity", static_cast<std::int64_t>(c.cache_capacity));
    if (capacity < 0) throw ConfigError("cache_capacity must be >= 0");
    c.cache_capacity = static_cast<std::size_t>(capacity);
    c.consensus_k = field(j, "consensus_k", c.consensus_k);
    c.request_timeout_secs = field(j, "request_timeout_secs", c.request_timeout_secs);
    c.seed = field(j, "seed", c.seed);
    if (const auto kb = field<std::string>(j, "kb_path", ""); !kb.empty()) c.kb_path = kb;
    if (const auto p = j.find("provider"); p != j.end()) {
        if (!p->is_object()) throw ConfigError("config field provider must be an object");
        c.provider.kind = field(*p, "kind", c.provider.kind);
        if (const auto f = field<std::string>(*p, "fixtures", ""); !f.empty()) c.provider.fixtures = f;
        c.provider.http.endpoint = field(*p, "endpoint", c.provider.http.endpoint);
        c.provider.http.model = field(*p, "model", c.provider.http.model);
        c.provider.http.call_timeout =
            std::chrono::milliseconds(field<std::int64_t>(*p, "call_timeout_ms", c.provider.http.call_timeout.count()));
        c.provider.http.max_attempts = field(*p, "max_attempts", c.provider.http.max_attempts);
    }
    validate(c);
    return c;
}

ServerConfig load_config(const std::optional<std::filesystem::path>& path) {
    ServerConfig c;
    if (path) {
        std::ifstream in(*path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file " + path->string());
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            c = config_from_json(artifact::parse_json(ss.str()));
        } catch (const artifact::DecodeError& e) {
            throw ConfigError("config file " + path->string() + " is not valid JSON: " + e.what());
        }
    }
    agents::apply_provider_env(c.provider);
    if (const char* kb = std::getenv("MLFIX_KB_PATH"); kb != nullptr && *kb != '\0') c.kb_path = kb;
    validate(c);
    return c;
}

// ---------------------------------------------------------------------------

std::optional<std::string> DiagnosisCache::get(const std::string& key) {
    std::lock_guard lock(mutex_);
    const auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
}

void DiagnosisCache::put(const std::string& key, std::string value) {
    if (capacity_ == 0) return;
    std::lock_guard lock(mutex_);
    if (const auto it = index_.find(key); it != index_.end()) {
        // Entries are immutable; a racing duplicate just refreshes recency.
        order_.splice(order_.begin(), order_, it->second);
        return;
    }
    order_.emplace_front(key, std::move(value));
    index_[key] = order_.begin();
    if (order_.size() > capacity_) {
        index_.erase(order_.back().first);
        order_.pop_back();
    }
}

std::size_t DiagnosisCache::size() const {
    std::lock_guard lock(mutex_);
    return order_.size();
}

std::string render_metrics(const MetricsSnapshot& m) {
    std::ostringstream out;
    out << "requests_total " << m.requests_total << "\n";
    out << "cache_hits " << m.cache_hits << "\n";
    out << "cache_misses " << m.cache_misses << "\n";
    out << "mean_diagnosis_seconds " << artifact::format_double(m.mean_diagnosis_seconds) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------

AnalysisService::AnalysisService(ServerConfig config, std::shared_ptr<agents::LLMProvider> provider,
                                 kb::KnowledgeBase kb)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      kb_(std::move(kb)),
      cache_(config_.cache_capacity),
      log_([](const std::string& line) { std::cerr << line << std::endl; }),
      now_([] { return Clock::now(); }) {
    validate(config_);
}

void AnalysisService::log(const std::string& line) const {
    if (log_) log_(line);
}

AnalyzeResponse AnalysisService::analyze(std::string_view body) {
    const auto start = Clock::now();
    ++requests_;
    artifact::ArtifactBundle bundle;
    try {
        bundle = artifact::decode_bundle(body);
        artifact::validate_bundle(bundle);
    } catch (const artifact::SyntaxError& e) {
        log("analyze status=400 reason=malformed-json");
        return {400, error_body(std::string("malformed JSON: ") + e.what()), ""};
    } catch (const artifact::DecodeError& e) {
        log("analyze status=422 path=" + e.path());
        return {422, error_body(e.what(), e.path()), ""};
    } catch (const artifact::EncodeError& e) {
        log("analyze status=422 path=" + e.path());
        return {422, error_body(e.what(), e.path()), ""};
    }

    const auto key = artifact::bundle_hash(bundle);
    const auto short_key = key.substr(0, 12);
    auto finish = [&](AnalyzeResponse r) {
        const double secs = seconds_since(start);
        {
            std::lock_guard lock(stats_mutex_);
            ++completed_;
            total_seconds_ += secs;
        }
        log("analyze status=200 bundle=" + short_key + " cache=" + r.cache + " seconds=" + artifact::format_double(secs));
        return r;
    };

    if (auto cached = cache_.get(key)) {
        ++hits_;
        return finish({200, std::move(*cached), "hit"});
    }
    ++misses_;

    agents::PipelineOptions options;
    options.consensus_k = config_.consensus_k;
    options.seed = config_.seed;
    options.deadline = start + std::chrono::seconds(config_.request_timeout_secs);
    try {
        const auto diagnosis = agents::run_pipeline(bundle, provider_, kb_, options);
        auto bytes = artifact::encode_diagnosis(diagnosis);
        if (diagnosis.degraded) {
            log("analyze bundle=" + short_key + " degraded (rule-based diagnosis, not cached)");
        } else {
            cache_.put(key, bytes);
        }
        return finish({200, std::move(bytes), "miss"});
    } catch (const std::exception& e) {
        log(std::string("analyze status=500 bundle=") + short_key + " internal error");
        return {500, error_body(std::string("internal error: ") + e.what()), ""};
    }
}

Json AnalysisService::health() {
    bool reachable = false;
    {
        std::lock_guard lock(probe_mutex_);
        const auto now = now_();
        if (!probed_at_ || now - *probed_at_ >= std::chrono::seconds(30)) {
            try {
                reachable_ = provider_ && provider_->reachable(std::chrono::milliseconds(1000));
            } catch (const std::exception&) {
                reachable_ = false;
            }
            probed_at_ = now;
        }
        reachable = reachable_;
    }
    return {{"status", "ok"},
            {"provider_reachable", reachable},
            {"kb_documents", static_cast<std::int64_t>(kb_.size())}};
}

MetricsSnapshot AnalysisService::metrics() const {
    MetricsSnapshot m;
    m.requests_total = requests_.load();
    m.cache_hits = hits_.load();
    m.cache_misses = misses_.load();
    std::lock_guard lock(stats_mutex_);
    m.analyses_completed = completed_;
    m.mean_diagnosis_seconds = completed_ == 0 ? 0.0 : total_seconds_ / static_cast<double>(completed_);
    return m;
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(AnalysisService& service) : service_(service), http_(std::make_unique<httplib::Server>()) {
    http_->set_payload_max_length(kMaxBodyBytes);
    http_->set_read_timeout(std::chrono::seconds(30));
    http_->set_write_timeout(std::chrono::seconds(30));

    http_->Post("/analyze", [this](const httplib::Request& req, httplib::Response& res) {
        auto r = service_.analyze(req.body);
        res.status = r.status;
        if (!r.cache.empty()) res.set_header("X-Cache", r.cache);
        res.set_content(std::move(r.body), "application/json");
    });
    http_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(artifact::canonical_dump(service_.health()), "application/json");
    });
    http_->Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(render_metrics(service_.metrics()), "text/plain; version=0.0.4");
    });
    http_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        if (res.status == 413) {
            res.set_content(error_body("request body exceeds 32 MiB"), "application/json");
        } else {
            res.set_content(error_body("HTTP " + std::to_string(res.status)), "application/json");
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = http_->bind_to_any_port(host);
    } else if (!http_->bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { http_->listen_after_bind(); }

void HttpServer::stop() {
    if (http_ && http_->is_running()) http_->stop();
}

}  // namespace mlfix::server
