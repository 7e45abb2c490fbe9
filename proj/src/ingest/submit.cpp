#include "mlfix/ingest/submit.hpp"

#include <httplib.h>

namespace mlfix::ingest {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host:port
    std::string prefix;  // path without trailing slash
};

Endpoint split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw NetworkError("server URL needs a scheme: " + url);
    const auto path = url.find('/', scheme + 3);
    Endpoint e;
    e.origin = url.substr(0, path);
    if (path != std::string::npos) e.prefix = url.substr(path);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    return e;
}

}  // namespace

std::string submit_bundle(std::string_view bundle_bytes, const std::string& server_url,
                          std::chrono::milliseconds timeout) {
    const auto endpoint = split_url(server_url);
    httplib::Client client(endpoint.origin);
    if (!client.is_valid()) throw NetworkError("unsupported server URL: " + server_url);
    const auto secs = timeout.count() / 1000;
    const auto usecs = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(endpoint.prefix + "/analyze", bundle_bytes.data(), bundle_bytes.size(),
                           "application/json");
    if (!res) {
        throw NetworkError("request to " + server_url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) throw ServerRejected(res->status, res->body);
    return res->body;
}

}  // namespace mlfix::ingest
