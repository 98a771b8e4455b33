#include "autoct/common/http.hpp"

#include <httplib.h>

#include <thread>

namespace autoct {

BaseUrl split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw HttpError("base URL lacks a scheme: " + url, 0);
    const auto path_start = url.find('/', scheme_end + 3);
    BaseUrl out;
    if (path_start == std::string::npos) {
        out.origin = url;
    } else {
        out.origin = url.substr(0, path_start);
        out.prefix = url.substr(path_start);
    }
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

nlohmann::json post_json(const std::string& base_url, const std::string& path, const std::string& api_key,
                         const nlohmann::json& body, const HttpOptions& options) {
    const BaseUrl base = split_base_url(base_url);
    httplib::Client client(base.origin);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    client.set_write_timeout(options.timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const std::string payload = body.dump();
    const std::string full_path = base.prefix + path;
    auto delay = options.backoff;
    for (int attempt = 0;; ++attempt) {
        auto res = client.Post(full_path, headers, payload, "application/json");
        const bool last = attempt >= options.retries;
        if (!res) {
            if (last) throw HttpError("request to " + base.origin + full_path + " failed: " +
                                          httplib::to_string(res.error()),
                                      0);
        } else if (res->status == 429 || res->status >= 500) {
            if (last) throw HttpError("HTTP " + std::to_string(res->status) + ": " + res->body, res->status);
        } else if (res->status < 200 || res->status >= 300) {
            throw HttpError("HTTP " + std::to_string(res->status) + ": " + res->body, res->status);
        } else {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw HttpError(std::string("response is not JSON: ") + e.what(), res->status);
            }
        }
        std::this_thread::sleep_for(delay);
        delay *= 2;
    }
}

}  // namespace autoct
