#pragma once

#include "autoct/common/http.hpp"
#include "autoct/llm/backend.hpp"

namespace autoct {

/// OpenAI-compatible chat-completions client. Tool messages are sent as user
/// messages prefixed with "Observation:".
class HttpBackend final : public LlmBackend {
public:
    HttpBackend(std::string base_url, std::string api_key, HttpOptions options = {});
    /// Reads AUTOCT_LLM_URL and AUTOCT_LLM_KEY; throws BackendFailure if the URL is unset.
    static std::shared_ptr<HttpBackend> from_env(HttpOptions options = {});

    std::string complete(const ChatRequest& request) override;

    /// Request body sent for `request`.
    [[nodiscard]] static nlohmann::json wire_body(const ChatRequest& request);

private:
    std::string base_url_;
    std::string api_key_;
    HttpOptions options_;
};

}  // namespace autoct
