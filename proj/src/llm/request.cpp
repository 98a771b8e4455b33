#include "autoct/llm/request.hpp"

#include "autoct/common/hash.hpp"

#include <stdexcept>

namespace autoct {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool: return "tool";
    }
    return "user";
}

std::optional<Role> parse_role(std::string_view text) {
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    if (text == "tool") return Role::Tool;
    return std::nullopt;
}

nlohmann::json to_json(const ChatRequest& req) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : req.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return {{"system", req.system},
            {"messages", std::move(messages)},
            {"temperature", req.temperature},
            {"model_id", req.model_id}};
}

ChatRequest request_from_json(const nlohmann::json& j) {
    ChatRequest req;
    req.system = j.at("system").get<std::string>();
    req.temperature = j.at("temperature").get<double>();
    req.model_id = j.at("model_id").get<std::string>();
    for (const auto& m : j.at("messages")) {
        auto role = parse_role(m.at("role").get<std::string>());
        if (!role) throw std::invalid_argument("unknown message role");
        req.messages.push_back({*role, m.at("content").get<std::string>()});
    }
    return req;
}

std::string cache_key(const ChatRequest& req) {
    // nlohmann objects are key-sorted, so dump() is canonical.
    return sha256_hex(to_json(req).dump());
}

}  // namespace autoct
