#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <stdexcept>
#include <string>

namespace autoct {

/// Transport or protocol failure talking to a remote JSON endpoint.
class HttpError : public std::runtime_error {
public:
    HttpError(const std::string& what, int status) : std::runtime_error(what), status_(status) {}
    /// HTTP status, or 0 when no response was received.
    [[nodiscard]] int status() const { return status_; }

private:
    int status_;
};

struct HttpOptions {
    std::chrono::seconds timeout{120};
    /// Attempts after the first for 429 and 5xx responses or connection errors.
    int retries = 3;
    std::chrono::milliseconds backoff{500};
};

/// Splits "https://host:port/v1" into the origin and the path prefix ("/v1").
struct BaseUrl {
    std::string origin;
    std::string prefix;
};
BaseUrl split_base_url(const std::string& url);

/// POSTs `body` to base_url + path with a bearer token (omitted when empty)
/// and returns the parsed JSON response. Retries transient failures with
/// exponential backoff; throws HttpError otherwise.
nlohmann::json post_json(const std::string& base_url, const std::string& path, const std::string& api_key,
                         const nlohmann::json& body, const HttpOptions& options = {});

}  // namespace autoct
