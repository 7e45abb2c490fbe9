#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mlfix::ingest {

/// The server answered with a non-200 status (CLI exit code 3).
class ServerRejected : public std::runtime_error {
public:
    ServerRejected(int status, std::string body)
        : std::runtime_error("server returned HTTP " + std::to_string(status) + ": " + body),
          status_(status),
          body_(std::move(body)) {}
    int status() const { return status_; }
    const std::string& body() const { return body_; }

private:
    int status_;
    std::string body_;
};

/// Connection failure or timeout (CLI exit code 4).
class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// POSTs canonical bundle bytes to `<server_url>/analyze` and returns the
/// response body unchanged. `server_url` is `http://host[:port][/prefix]`.
std::string submit_bundle(std::string_view bundle_bytes, const std::string& server_url,
                          std::chrono::milliseconds timeout);

}  // namespace mlfix::ingest
