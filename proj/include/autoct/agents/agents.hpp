#pragma once

#include "autoct/agents/prompts.hpp"
#include "autoct/agents/tools.hpp"
#include "autoct/domain/plan.hpp"
#include "autoct/domain/proposal.hpp"
#include "autoct/domain/types.hpp"
#include "autoct/domain/values.hpp"
#include "autoct/llm/backend.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace autoct {

/// The initializing proposer produced no usable idea.
class EmptyProposal : public Error {
public:
    using Error::Error;
};

/// The iterative proposer named a feature that is not in the active set.
class InvalidTarget : public Error {
public:
    using Error::Error;
};

/// The planner's plan failed validation after a corrective retry.
class InvalidPlan : public Error {
public:
    using Error::Error;
};

struct AgentSettings {
    std::string model_id = "gpt-4o-mini";
    double temperature = 0.0;
    int max_retries = 2;
    int react_max_steps = 8;
    std::size_t max_group_size = 4;
    std::size_t build_workers = 4;
    std::size_t max_model_suggestions = 3;
    std::size_t max_suggestions = 6;
};

struct AgentResources {
    std::shared_ptr<LlmBackend> backend;
    std::shared_ptr<const PromptLibrary> prompts;
    ToolContext tools;
};

/// A misclassified validation trial shown to the error-based evaluator.
struct MisclassifiedExample {
    TrialRecord trial;
    int predicted = 0;
    double probability = 0.0;
    std::map<std::string, SubFeatureValues> values;
    std::map<std::string, std::string> none_reasons;
};

struct EvaluatorInput {
    Metric metric = Metric::RocAuc;
    double metric_score = 0.0;
    PlanSet plans;
    /// Feature name -> importance of the selected model.
    std::map<std::string, double> importances;
};

/// Renders the example block given to the error-based evaluator.
std::string render_example(const MisclassifiedExample& ex);

/// Reads {"feature_name"|"name", "description"} objects into ideas with
/// snake_case names made unique by `_2`, `_3`, ... suffixes.
std::vector<FeatureIdea> ideas_from_json(const nlohmann::json& list);

/// Deterministic repair of a grouping reply: unknown names are dropped,
/// repeated names keep their first occurrence, omitted names become
/// singletons (in input order) and oversize groups are split in order.
std::vector<std::vector<std::string>> repair_groups(const std::vector<std::vector<std::string>>& proposed,
                                                    const std::vector<std::string>& names, std::size_t max_size);

/// Merges per-source suggestion lists: model-based first, then error-based
/// lists interleaved round-robin, truncated to `cap`.
std::vector<Suggestion> aggregate_suggestions(const std::vector<Suggestion>& model_based,
                                              const std::vector<std::vector<Suggestion>>& error_based,
                                              std::size_t cap);

/// The agent roles: proposers, planner, grouper, researcher + builder and the
/// two evaluators. Each operation renders a prompt, calls the backend and
/// validates the reply.
class Agents {
public:
    Agents(AgentResources resources, AgentSettings settings, TaskSpec task);

    [[nodiscard]] std::vector<FeatureIdea> propose_initial(const std::vector<TrialRecord>& positives,
                                                           const std::vector<TrialRecord>& negatives) const;
    [[nodiscard]] ProposalAction propose_iterative(const Suggestion& suggestion, const PlanSet& active) const;
    [[nodiscard]] FeaturePlan plan_feature(const FeatureIdea& idea) const;
    [[nodiscard]] std::vector<std::vector<std::string>> group_features(const std::vector<FeaturePlan>& plans) const;
    /// Researches and builds one group of features for one trial. Unusable
    /// builder output yields AGENT_FAILURE entries instead of an error.
    [[nodiscard]] FeatureValueSet build_group(const TrialRecord& trial, const std::vector<FeaturePlan>& group) const;
    /// Builds every group for every trial, trials in parallel; results are in
    /// ascending nct_id order.
    [[nodiscard]] std::vector<FeatureValueSet> build_features(const std::vector<TrialRecord>& trials,
                                                              const std::vector<FeaturePlan>& plans,
                                                              const std::vector<std::vector<std::string>>& groups) const;
    [[nodiscard]] std::vector<Suggestion> evaluate_model(const EvaluatorInput& input) const;
    [[nodiscard]] std::vector<Suggestion> evaluate_error(const EvaluatorInput& input,
                                                         const MisclassifiedExample& example) const;
    /// Model-based evaluation plus one error-based evaluation per example, aggregated.
    [[nodiscard]] std::vector<Suggestion> evaluate(const EvaluatorInput& input,
                                                   const std::vector<MisclassifiedExample>& examples) const;

    [[nodiscard]] const AgentSettings& settings() const { return settings_; }
    [[nodiscard]] const TaskSpec& task() const { return task_; }

private:
    ChatRequest request(const std::string& prompt, const PromptVars& vars) const;

    AgentResources res_;
    AgentSettings settings_;
    TaskSpec task_;
};

}  // namespace autoct
