#pragma once

#include "autoct/domain/plan.hpp"
#include "autoct/domain/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace autoct {

enum class Origin { ModelBased, ErrorBased };

std::string_view to_string(Origin o);
std::optional<Origin> parse_origin(std::string_view text);

/// Free-form improvement recommendation from an evaluator.
struct Suggestion {
    std::string text;
    Origin origin = Origin::ModelBased;

    friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

enum class ActionKind { Add, Refine, Remove };

std::string_view to_string(ActionKind k);
std::optional<ActionKind> parse_action_kind(std::string_view text);

/// Edge label of the search tree. Construct through the factories, which
/// enforce that Add has no target and Remove has no idea.
class ProposalAction {
public:
    static ProposalAction add(FeatureIdea idea, Origin origin);
    static ProposalAction refine(FeatureIdea idea, Origin origin);
    static ProposalAction remove(std::string target, Origin origin);

    [[nodiscard]] ActionKind kind() const { return kind_; }
    [[nodiscard]] const std::optional<std::string>& target_feature() const { return target_; }
    [[nodiscard]] const std::optional<FeatureIdea>& idea() const { return idea_; }
    [[nodiscard]] Origin origin() const { return origin_; }

    /// "Add(name)", "Refine(name)", "Remove(name)".
    [[nodiscard]] std::string summary() const;

    friend bool operator==(const ProposalAction&, const ProposalAction&) = default;

private:
    ProposalAction(ActionKind kind, std::optional<std::string> target, std::optional<FeatureIdea> idea,
                   Origin origin)
        : kind_(kind), target_(std::move(target)), idea_(std::move(idea)), origin_(origin) {}

    ActionKind kind_;
    std::optional<std::string> target_;
    std::optional<FeatureIdea> idea_;
    Origin origin_;
};

nlohmann::json to_json(const ProposalAction& a);
ProposalAction action_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Suggestion& s);
Suggestion suggestion_from_json(const nlohmann::json& j);

/// Pure update of the active plan set.
///  - Add: inserts `new_plan`; DuplicateFeature if the name is taken.
///  - Refine: replaces the plan under `target_feature`; `new_plan` must keep that name.
///  - Remove: deletes `target_feature`.
/// UnknownFeature when the Refine/Remove target is absent.
PlanSet apply_proposal(const PlanSet& active, const ProposalAction& action,
                       const std::optional<FeaturePlan>& new_plan);

}  // namespace autoct
