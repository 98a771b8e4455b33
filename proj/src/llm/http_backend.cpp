#include "autoct/llm/http_backend.hpp"

#include <cstdlib>

namespace autoct {

HttpBackend::HttpBackend(std::string base_url, std::string api_key, HttpOptions options)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), options_(options) {}

std::shared_ptr<HttpBackend> HttpBackend::from_env(HttpOptions options) {
    const char* url = std::getenv("AUTOCT_LLM_URL");
    if (url == nullptr || *url == '\0') throw BackendFailure("AUTOCT_LLM_URL is not set");
    const char* key = std::getenv("AUTOCT_LLM_KEY");
    return std::make_shared<HttpBackend>(url, key != nullptr ? key : "", options);
}

nlohmann::json HttpBackend::wire_body(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
    for (const auto& m : request.messages) {
        if (m.role == Role::Tool) {
            messages.push_back({{"role", "user"}, {"content", "Observation: " + m.content}});
        } else {
            messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
        }
    }
    return {{"model", request.model_id}, {"temperature", request.temperature}, {"messages", std::move(messages)}};
}

std::string HttpBackend::complete(const ChatRequest& request) {
    nlohmann::json res;
    try {
        res = post_json(base_url_, "/chat/completions", api_key_, wire_body(request), options_);
    } catch (const HttpError& e) {
        throw BackendFailure(std::string("chat completion failed: ") + e.what());
    }
    try {
        const auto& content = res.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendFailure(std::string("unexpected chat completion response: ") + e.what());
    }
}

}  // namespace autoct
