#include "autoct/llm/structured.hpp"

#include <cctype>

namespace autoct {

namespace {

/// Index one past the bracket closing the value opened at `start`, ignoring
/// brackets inside strings.
std::optional<std::size_t> match_brackets(std::string_view text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{' || c == '[') {
            ++depth;
        } else if (c == '}' || c == ']') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::nullopt;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

/// Rewrites Python literals and trailing commas outside strings.
std::string repair(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_string = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            out.push_back(c);
            if (c == '\\' && i + 1 < text.size()) {
                out.push_back(text[++i]);
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
            out.push_back(c);
            continue;
        }
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j])) != 0) ++j;
            if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) != 0 && (i == 0 || !is_word_char(text[i - 1]))) {
            std::size_t j = i;
            while (j < text.size() && is_word_char(text[j])) ++j;
            const std::string_view word = text.substr(i, j - i);
            if (word == "None") {
                out += "null";
            } else if (word == "True") {
                out += "true";
            } else if (word == "False") {
                out += "false";
            } else {
                out += word;
            }
            i = j - 1;
            continue;
        }
        out.push_back(c);
    }
    return out;
}

std::optional<nlohmann::json> try_parse(std::string_view span) {
    auto parsed = nlohmann::json::parse(span, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    parsed = nlohmann::json::parse(repair(span), nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    return std::nullopt;
}

}  // namespace

Schema any_json_schema() {
    return {"any JSON value", [](const nlohmann::json&) -> std::optional<std::string> { return std::nullopt; }};
}

std::vector<nlohmann::json> extract_json_values(std::string_view text) {
    std::vector<nlohmann::json> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '{' && text[i] != '[') {
            ++i;
            continue;
        }
        auto end = match_brackets(text, i);
        if (end) {
            if (auto value = try_parse(text.substr(i, *end - i))) {
                out.push_back(std::move(*value));
                i = *end;
                continue;
            }
        }
        ++i;
    }
    return out;
}

std::optional<nlohmann::json> extract_first_json(std::string_view text, const Schema& schema) {
    for (auto& v : extract_json_values(text)) {
        if (!schema.check(v)) return std::move(v);
    }
    return std::nullopt;
}

nlohmann::json complete_structured(LlmBackend& backend, ChatRequest request, const Schema& schema, int max_retries,
                                   std::string* raw_out) {
    if (max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
    std::vector<std::string> raw;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        std::string reply = backend.complete(request);
        raw.push_back(reply);
        std::optional<std::string> problem;
        for (auto& v : extract_json_values(reply)) {
            auto err = schema.check(v);
            if (!err) {
                if (raw_out != nullptr) *raw_out = reply;
                return std::move(v);
            }
            if (!problem) problem = std::move(err);
        }
        request.messages.push_back({Role::Assistant, std::move(reply)});
        request.messages.push_back(
            {Role::User, "Your previous reply could not be used: " +
                             problem.value_or("it contains no JSON value") +
                             ". Reply again with only a JSON value matching this description: " + schema.description});
    }
    throw UnparseableOutput("no valid " + schema.description + " after " + std::to_string(max_retries + 1) +
                                " attempts",
                            std::move(raw));
}

}  // namespace autoct
