#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autoct {

enum class Role { User, Assistant, Tool };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view text);

struct Message {
    Role role = Role::User;
    std::string content;

    friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
    std::string system;
    std::vector<Message> messages;
    double temperature = 0.0;
    std::string model_id;

    friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

/// Canonical form: sorted keys, content strings verbatim.
nlohmann::json to_json(const ChatRequest& req);
ChatRequest request_from_json(const nlohmann::json& j);

/// SHA-256 hex digest of the canonical serialization.
std::string cache_key(const ChatRequest& req);

}  // namespace autoct
