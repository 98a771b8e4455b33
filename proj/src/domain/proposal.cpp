#include "autoct/domain/proposal.hpp"

#include "autoct/common/text.hpp"
#include "autoct/domain/errors.hpp"

#include <stdexcept>

namespace autoct {

using nlohmann::json;

std::string_view to_string(Origin o) {
    return o == Origin::ModelBased ? "model_based" : "error_based";
}

std::optional<Origin> parse_origin(std::string_view text) {
    if (text == "model_based") return Origin::ModelBased;
    if (text == "error_based") return Origin::ErrorBased;
    return std::nullopt;
}

std::string_view to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Add: return "Add";
        case ActionKind::Refine: return "Refine";
        case ActionKind::Remove: return "Remove";
    }
    return "?";
}

std::optional<ActionKind> parse_action_kind(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "add") return ActionKind::Add;
    if (t == "refine") return ActionKind::Refine;
    if (t == "remove") return ActionKind::Remove;
    return std::nullopt;
}

ProposalAction ProposalAction::add(FeatureIdea idea, Origin origin) {
    return ProposalAction(ActionKind::Add, std::nullopt, std::move(idea), origin);
}

ProposalAction ProposalAction::refine(FeatureIdea idea, Origin origin) {
    std::string target = idea.feature_name;
    return ProposalAction(ActionKind::Refine, std::move(target), std::move(idea), origin);
}

ProposalAction ProposalAction::remove(std::string target, Origin origin) {
    return ProposalAction(ActionKind::Remove, std::move(target), std::nullopt, origin);
}

std::string ProposalAction::summary() const {
    const std::string& name = target_ ? *target_ : idea_->feature_name;
    return std::string(to_string(kind_)) + "(" + name + ")";
}

json to_json(const ProposalAction& a) {
    json j{{"kind", std::string(to_string(a.kind()))}, {"origin", std::string(to_string(a.origin()))}};
    if (a.target_feature()) j["target_feature"] = *a.target_feature();
    if (a.idea()) {
        j["idea"] = {{"feature_name", a.idea()->feature_name}, {"description", a.idea()->description}};
    }
    return j;
}

ProposalAction action_from_json(const json& j) {
    auto kind = parse_action_kind(j.at("kind").get<std::string>());
    auto origin = parse_origin(j.at("origin").get<std::string>());
    if (!kind || !origin) throw std::invalid_argument("malformed action: " + j.dump());
    auto idea = [&] {
        const json& i = j.at("idea");
        return FeatureIdea{i.at("feature_name").get<std::string>(), i.at("description").get<std::string>()};
    };
    switch (*kind) {
        case ActionKind::Add: return ProposalAction::add(idea(), *origin);
        case ActionKind::Refine: return ProposalAction::refine(idea(), *origin);
        case ActionKind::Remove:
            return ProposalAction::remove(j.at("target_feature").get<std::string>(), *origin);
    }
    throw std::invalid_argument("malformed action: " + j.dump());
}

json to_json(const Suggestion& s) {
    return json{{"text", s.text}, {"origin", std::string(to_string(s.origin))}};
}

Suggestion suggestion_from_json(const json& j) {
    auto origin = parse_origin(j.at("origin").get<std::string>());
    if (!origin) throw std::invalid_argument("malformed suggestion: " + j.dump());
    return Suggestion{j.at("text").get<std::string>(), *origin};
}

PlanSet apply_proposal(const PlanSet& active, const ProposalAction& action,
                       const std::optional<FeaturePlan>& new_plan) {
    PlanSet out = active;
    switch (action.kind()) {
        case ActionKind::Add: {
            if (!new_plan) throw std::invalid_argument("Add requires a plan");
            if (out.contains(new_plan->feature_name)) throw DuplicateFeature(new_plan->feature_name);
            out.emplace(new_plan->feature_name, *new_plan);
            break;
        }
        case ActionKind::Refine: {
            const std::string& target = *action.target_feature();
            if (!out.contains(target)) throw UnknownFeature(target);
            if (!new_plan) throw std::invalid_argument("Refine requires a plan");
            if (new_plan->feature_name != target) {
                throw std::invalid_argument("Refine may not rename '" + target + "' to '" +
                                            new_plan->feature_name + "'");
            }
            out[target] = *new_plan;
            break;
        }
        case ActionKind::Remove: {
            const std::string& target = *action.target_feature();
            if (out.erase(target) == 0) throw UnknownFeature(target);
            break;
        }
    }
    return out;
}

}  // namespace autoct
