#pragma once

#include "autoct/llm/backend.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autoct {

/// Expected JSON shape: a human-readable description used in corrective
/// messages and a check that returns an error message on mismatch.
struct Schema {
    std::string description;
    std::function<std::optional<std::string>(const nlohmann::json&)> check;
};

Schema any_json_schema();

/// Every top-level JSON object or array embedded in `text`, in order of
/// appearance. Tolerates prose, code fences and Python-style None/True/False.
std::vector<nlohmann::json> extract_json_values(std::string_view text);

/// First embedded value accepted by `schema`, if any.
std::optional<nlohmann::json> extract_first_json(std::string_view text, const Schema& schema);

class UnparseableOutput : public Error {
public:
    UnparseableOutput(const std::string& what, std::vector<std::string> raw)
        : Error(what), raw_(std::move(raw)) {}
    [[nodiscard]] const std::vector<std::string>& raw_responses() const { return raw_; }

private:
    std::vector<std::string> raw_;
};

/// Calls the backend and parses the reply against `schema`. On failure the
/// reply and a corrective user message are appended and the call is retried,
/// up to max_retries times. The accepted raw reply is stored in `raw_out`.
nlohmann::json complete_structured(LlmBackend& backend, ChatRequest request, const Schema& schema,
                                   int max_retries = 2, std::string* raw_out = nullptr);

}  // namespace autoct
