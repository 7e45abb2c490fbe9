#include "mlfix/agents/provider.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mlfix/artifact/codec.hpp"

namespace mlfix::agents {

using artifact::Json;

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read fixture file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::int64_t rough_tokens(const std::string& text) { return static_cast<std::int64_t>(text.size() / 4 + 1); }

LLMResponse local_response(std::string content, const LLMRequest& request, std::string provider) {
    LLMResponse r;
    for (const auto& m : request.messages) r.usage.prompt_tokens += rough_tokens(m.content);
    r.usage.completion_tokens = rough_tokens(content);
    r.content = std::move(content);
    r.provider_id = std::move(provider);
    return r;
}

}  // namespace

std::string prompt_hash(const LLMRequest& request) {
    Json messages = Json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    Json key = {{"messages", messages}, {"seed", request.seed ? Json(*request.seed) : Json(nullptr)}};
    return artifact::sha256_hex(artifact::canonical_dump(key));
}

ScriptedProvider::ScriptedProvider(std::map<std::string, std::string> fixtures) : fixtures_(std::move(fixtures)) {}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path) {
    Json json;
    try {
        json = Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    if (!json.is_object()) throw std::invalid_argument(path.string() + ": expected an object of hash -> completion");
    std::map<std::string, std::string> fixtures;
    for (const auto& [hash, completion] : json.items()) {
        if (!completion.is_string()) throw std::invalid_argument(path.string() + ": " + hash + " must map to a string");
        fixtures[hash] = completion.get<std::string>();
    }
    return std::make_shared<ScriptedProvider>(std::move(fixtures));
}

LLMResponse ScriptedProvider::complete(const LLMRequest& request) {
    const auto hash = prompt_hash(request);
    const auto it = fixtures_.find(hash);
    if (it == fixtures_.end()) throw FixtureMiss(hash);
    return local_response(it->second, request, id());
}

LLMResponse EchoProvider::complete(const LLMRequest& request) {
    std::string draft = "{}";
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role != "user") continue;
        const auto& text = it->content;
        const auto open = text.rfind("<draft>");
        if (open == std::string::npos) continue;
        const auto start = open + 7;
        const auto close = text.find("</draft>", start);
        if (close == std::string::npos) continue;
        draft = text.substr(start, close - start);
        break;
    }
    return local_response(std::move(draft), request, id());
}

LLMResponse RecordingProvider::complete(const LLMRequest& request) {
    auto response = inner_->complete(request);
    std::lock_guard lock(mutex_);
    recorded_[prompt_hash(request)] = response.content;
    return response;
}

std::map<std::string, std::string> RecordingProvider::recorded() const {
    std::lock_guard lock(mutex_);
    return recorded_;
}

void RecordingProvider::save(const std::filesystem::path& path) const {
    Json json = Json::object();
    for (const auto& [hash, completion] : recorded()) json[hash] = completion;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << json.dump(2) << '\n';
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {
    const auto scheme = config_.endpoint.find("://");
    if (scheme == std::string::npos) throw std::invalid_argument("provider endpoint must be an http(s) URL");
    const auto slash = config_.endpoint.find('/', scheme + 3);
    base_ = config_.endpoint.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
    if (config_.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
}

LLMResponse HttpChatProvider::complete(const LLMRequest& request) {
    Json messages = Json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    Json body = {{"model", config_.model},
                 {"messages", messages},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens}};
    if (request.seed) body["seed"] = *request.seed;
    if (request.response_format_hint == "json") body["response_format"] = {{"type", "json_object"}};
    const auto payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    bool all_timeouts = true;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0 && !config_.backoff.empty()) {
            const auto i = std::min<std::size_t>(static_cast<std::size_t>(attempt - 1), config_.backoff.size() - 1);
            std::this_thread::sleep_for(config_.backoff[i]);
        }
        httplib::Client client(base_);
        client.set_connection_timeout(config_.call_timeout);
        client.set_read_timeout(config_.call_timeout);
        client.set_write_timeout(config_.call_timeout);
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            all_timeouts = all_timeouts && res.error() == httplib::Error::Read;
            last_error = httplib::to_string(res.error());
            continue;
        }
        all_timeouts = false;
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw ProviderError("provider returned HTTP " + std::to_string(res->status));
        try {
            const auto json = Json::parse(res->body);
            LLMResponse out;
            out.content = json.at("choices").at(0).at("message").at("content").get<std::string>();
            out.provider_id = id();
            if (const auto u = json.find("usage"); u != json.end() && u->is_object()) {
                out.usage.prompt_tokens = u->value("prompt_tokens", std::int64_t{0});
                out.usage.completion_tokens = u->value("completion_tokens", std::int64_t{0});
            }
            return out;
        } catch (const Json::exception& e) {
            throw ProviderError(std::string("malformed chat-completion response: ") + e.what());
        }
    }
    const auto message = "provider unavailable after " + std::to_string(config_.max_attempts) +
                         " attempts: " + last_error;
    if (all_timeouts) throw ProviderTimeout(message);
    throw ProviderError(message);
}

bool HttpChatProvider::reachable(std::chrono::milliseconds timeout) {
    httplib::Client client(base_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    // Any HTTP answer at all counts; the route may well reject GET.
    return static_cast<bool>(client.Get(path_));
}

void apply_provider_env(ProviderSettings& settings) {
    if (const char* e = std::getenv("MLFIX_LLM_ENDPOINT"); e != nullptr && *e != '\0') settings.http.endpoint = e;
    if (const char* k = std::getenv("MLFIX_LLM_API_KEY"); k != nullptr && *k != '\0') settings.http.api_key = k;
}

std::shared_ptr<LLMProvider> make_provider(const ProviderSettings& settings) {
    if (settings.kind == "echo") return std::make_shared<EchoProvider>();
    if (settings.kind == "scripted") {
        if (!settings.fixtures) throw std::invalid_argument("the scripted provider needs a fixture file");
        return ScriptedProvider::from_file(*settings.fixtures);
    }
    if (settings.kind == "http") {
        if (settings.http.endpoint.empty()) {
            throw std::invalid_argument("the http provider needs an endpoint (MLFIX_LLM_ENDPOINT)");
        }
        return std::make_shared<HttpChatProvider>(settings.http);
    }
    throw std::invalid_argument("unknown provider: " + settings.kind);
}

}  // namespace mlfix::agents
