#include "autoct/llm/react.hpp"

#include "autoct/llm/structured.hpp"

#include <set>
#include <stdexcept>

namespace autoct {

namespace {

struct Turn {
    bool is_final = false;
    std::string thought;
    std::string action;
    nlohmann::json args = nlohmann::json::object();
    std::string final;
};

std::string as_text(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

Turn parse_turn(const std::string& reply) {
    for (const auto& v : extract_json_values(reply)) {
        if (!v.is_object()) continue;
        Turn t;
        if (auto it = v.find("thought"); it != v.end() && !it->is_null()) t.thought = as_text(*it);
        if (auto it = v.find("action"); it != v.end() && it->is_string() && !it->get<std::string>().empty()) {
            t.action = it->get<std::string>();
            if (auto a = v.find("args"); a != v.end() && !a->is_null()) t.args = *a;
            return t;
        }
        if (auto it = v.find("final"); it != v.end()) {
            t.is_final = true;
            t.final = it->is_null() ? std::string() : as_text(*it);
            return t;
        }
    }
    // Neither a tool call nor an explicit answer: the whole reply is the answer.
    Turn t;
    t.is_final = true;
    t.final = reply;
    return t;
}

}  // namespace

std::string react_protocol(const std::vector<Tool>& tools) {
    std::string out = "\n\nYou can use the following tools:\n";
    for (const auto& t : tools) {
        out += "- " + t.spec.name + "(";
        for (std::size_t i = 0; i < t.spec.params.size(); ++i) {
            if (i > 0) out += ", ";
            out += t.spec.params[i].name + ": " + t.spec.params[i].type;
        }
        out += "): " + t.spec.description + "\n";
    }
    out +=
        "\nWork step by step. To call a tool, reply with exactly one JSON object of the form\n"
        "{\"thought\": \"<your reasoning>\", \"action\": \"<tool name>\", \"args\": {<arguments>}}\n"
        "and wait for the observation. When you have enough information, reply with\n"
        "{\"thought\": \"<your reasoning>\", \"final\": <your answer>}\n";
    return out;
}

ReactTrace react_loop(LlmBackend& backend, const std::string& system, const std::string& user,
                      const std::vector<Tool>& tools, const ReactOptions& options) {
    if (options.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
    std::set<std::string> names;
    for (const auto& t : tools) {
        if (!t.impl) throw std::invalid_argument("tool " + t.spec.name + " has no implementation");
        if (!names.insert(t.spec.name).second) throw std::invalid_argument("duplicate tool " + t.spec.name);
    }

    ChatRequest request;
    request.system = system + react_protocol(tools);
    request.model_id = options.model_id;
    request.temperature = options.temperature;
    request.messages.push_back({Role::User, user});

    ReactTrace trace;
    std::string last_reply;
    while (static_cast<int>(trace.steps.size()) < options.max_steps) {
        last_reply = backend.complete(request);
        request.messages.push_back({Role::Assistant, last_reply});
        Turn turn = parse_turn(last_reply);
        if (turn.is_final) {
            trace.final = std::move(turn.final);
            return trace;
        }
        ReactStep step{turn.thought, turn.action, turn.args, {}};
        const Tool* tool = nullptr;
        for (const auto& t : tools) {
            if (t.spec.name == turn.action) tool = &t;
        }
        if (tool == nullptr) {
            step.observation = "Error: unknown tool '" + turn.action + "'.";
        } else {
            try {
                step.observation = tool->impl(turn.args);
            } catch (const BackendFailure&) {
                throw;
            } catch (const std::exception& e) {
                step.observation = std::string("Error: ") + e.what();
            }
        }
        request.messages.push_back({Role::Tool, step.observation});
        trace.steps.push_back(std::move(step));
    }
    trace.truncated = true;
    trace.final = last_reply;
    return trace;
}

}  // namespace autoct
