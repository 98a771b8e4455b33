#pragma once

#include "autoct/llm/backend.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace autoct {

struct ToolParam {
    std::string name;
    std::string type;
    std::string description;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ToolParam> params;
};

/// A tool invocation that failed; reported back to the model as an observation.
class ToolFailure : public Error {
public:
    using Error::Error;
};

struct Tool {
    ToolSpec spec;
    std::function<std::string(const nlohmann::json& args)> impl;
};

struct ReactStep {
    std::string thought;
    std::string action;
    nlohmann::json args;
    std::string observation;
};

struct ReactTrace {
    std::vector<ReactStep> steps;
    std::string final;
    bool truncated = false;
};

struct ReactOptions {
    std::string model_id;
    double temperature = 0.0;
    int max_steps = 8;
};

/// Protocol text appended to the system prompt of every ReAct agent.
std::string react_protocol(const std::vector<Tool>& tools);

/// Alternates model turns and tool calls until the model answers or
/// max_steps tool calls have been made. Tool errors become observations;
/// BackendFailure propagates.
ReactTrace react_loop(LlmBackend& backend, const std::string& system, const std::string& user,
                      const std::vector<Tool>& tools, const ReactOptions& options);

}  // namespace autoct
