#include "autoct/agents/agents.hpp"

#include "autoct/common/parallel.hpp"
#include "autoct/common/text.hpp"
#include "autoct/llm/react.hpp"
#include "autoct/llm/structured.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace autoct {

using nlohmann::json;

namespace {

std::optional<std::string> idea_object_error(const json& item) {
    if (!item.is_object()) return "each idea must be an object";
    const json* name = nullptr;
    if (auto it = item.find("feature_name"); it != item.end()) name = &*it;
    if (name == nullptr) {
        if (auto it = item.find("name"); it != item.end()) name = &*it;
    }
    if (name == nullptr || !name->is_string() || trim(name->get<std::string>()).empty()) {
        return "each idea needs a non-empty \"feature_name\" string";
    }
    if (auto it = item.find("description"); it == item.end() || !it->is_string()) {
        return "each idea needs a \"description\" string";
    }
    return std::nullopt;
}

Schema ideas_schema(bool allow_empty) {
    return {"a JSON array of objects with \"feature_name\" and \"description\" strings",
            [allow_empty](const json& j) -> std::optional<std::string> {
                if (!j.is_array()) return "expected a JSON array of ideas";
                if (j.empty() && !allow_empty) return "the list of ideas is empty";
                for (const auto& item : j) {
                    if (auto err = idea_object_error(item)) return err;
                }
                return std::nullopt;
            }};
}

Schema string_list_schema() {
    return {"a JSON array of suggestion strings", [](const json& j) -> std::optional<std::string> {
                if (!j.is_array()) return "expected a JSON array of strings";
                for (const auto& s : j) {
                    if (!s.is_string()) return "every suggestion must be a string";
                }
                return std::nullopt;
            }};
}

std::string unique_name(std::string name, const std::set<std::string>& taken) {
    if (!taken.contains(name)) return name;
    for (int i = 2;; ++i) {
        std::string candidate = name + "_" + std::to_string(i);
        if (!taken.contains(candidate)) return candidate;
    }
}

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

json plans_json(const std::vector<FeaturePlan>& plans) {
    json j = json::object();
    for (const auto& p : plans) j[p.feature_name] = to_json(p);
    return j;
}

/// Finds the plan object inside a planner reply: the object itself, or its
/// entry for `name`, or the single entry of a one-element map.
const json* locate_plan(const json& j, const std::string& name) {
    if (!j.is_object()) return nullptr;
    if (j.contains("feature_type")) return &j;
    if (auto it = j.find(name); it != j.end() && it->is_object()) return &*it;
    if (j.size() == 1 && j.begin()->is_object() && j.begin()->contains("feature_type")) return &*j.begin();
    return nullptr;
}

FeaturePlan parse_plan_reply(const json& j, const FeatureIdea& idea) {
    const json* obj = locate_plan(j, idea.feature_name);
    if (obj == nullptr) throw PlanParseError("no plan object with a \"feature_type\" key");
    json copy = *obj;
    copy["feature_name"] = idea.feature_name;
    if (!copy.contains("feature_idea") || !copy["feature_idea"].is_string() ||
        copy["feature_idea"].get<std::string>().empty()) {
        copy["feature_idea"] = idea.description;
    }
    return plan_from_json(copy);
}

struct ParsedAction {
    std::string kind;
    std::string name;
    std::string description;
};

std::optional<std::string> action_error(const json& j) {
    if (!j.is_object()) return "expected a JSON object";
    auto a = j.find("action");
    if (a == j.end() || !a->is_string()) return "missing \"action\" string";
    const std::string kind = to_lower(trim(a->get<std::string>()));
    if (kind != "add" && kind != "refine" && kind != "remove") return "\"action\" must be add, refine or remove";
    auto n = j.find("feature_name");
    if (n == j.end() || !n->is_string() || trim(n->get<std::string>()).empty()) return "missing \"feature_name\"";
    if (kind != "remove") {
        auto d = j.find("description");
        if (d == j.end() || !d->is_string() || trim(d->get<std::string>()).empty()) {
            return "add and refine need a non-empty \"description\"";
        }
    }
    return std::nullopt;
}

ParsedAction parse_action(const json& j) {
    ParsedAction p;
    p.kind = to_lower(trim(j.at("action").get<std::string>()));
    p.name = to_feature_name(j.at("feature_name").get<std::string>());
    if (auto d = j.find("description"); d != j.end() && d->is_string()) p.description = trim(d->get<std::string>());
    return p;
}

std::vector<std::string> string_items(const json& arr) {
    std::vector<std::string> out;
    for (const auto& s : arr) {
        if (!s.is_string()) continue;
        std::string t = trim(s.get<std::string>());
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

bool is_none_marker(const json& raw) {
    if (raw.is_null()) return true;
    if (!raw.is_string()) return false;
    const std::string s = to_lower(trim(raw.get<std::string>()));
    return s == "none" || s == "null";
}

}  // namespace

std::vector<FeatureIdea> ideas_from_json(const json& list) {
    std::vector<FeatureIdea> out;
    std::set<std::string> taken;
    for (const auto& item : list) {
        if (idea_object_error(item)) continue;
        const json& name = item.contains("feature_name") ? item.at("feature_name") : item.at("name");
        std::string fname = unique_name(to_feature_name(name.get<std::string>()), taken);
        taken.insert(fname);
        out.push_back({fname, trim(item.at("description").get<std::string>())});
    }
    return out;
}

std::vector<std::vector<std::string>> repair_groups(const std::vector<std::vector<std::string>>& proposed,
                                                    const std::vector<std::string>& names, std::size_t max_size) {
    if (max_size == 0) max_size = 1;
    const std::set<std::string> known(names.begin(), names.end());
    std::set<std::string> used;
    std::vector<std::vector<std::string>> out;
    auto emit = [&](const std::vector<std::string>& group) {
        for (std::size_t i = 0; i < group.size(); i += max_size) {
            out.emplace_back(group.begin() + static_cast<long>(i),
                             group.begin() + static_cast<long>(std::min(group.size(), i + max_size)));
        }
    };
    for (const auto& g : proposed) {
        std::vector<std::string> kept;
        for (const auto& n : g) {
            if (known.contains(n) && used.insert(n).second) kept.push_back(n);
        }
        if (!kept.empty()) emit(kept);
    }
    for (const auto& n : names) {
        if (used.insert(n).second) out.push_back({n});
    }
    return out;
}

std::vector<Suggestion> aggregate_suggestions(const std::vector<Suggestion>& model_based,
                                              const std::vector<std::vector<Suggestion>>& error_based,
                                              std::size_t cap) {
    std::vector<Suggestion> out;
    for (const auto& s : model_based) {
        if (out.size() < cap) out.push_back(s);
    }
    for (std::size_t round = 0; out.size() < cap; ++round) {
        bool any = false;
        for (const auto& list : error_based) {
            if (round < list.size()) {
                any = true;
                if (out.size() < cap) out.push_back(list[round]);
            }
        }
        if (!any) break;
    }
    return out;
}

std::string render_example(const MisclassifiedExample& ex) {
    json values = json::object();
    for (const auto& [name, subs] : ex.values) values[name] = to_json(subs);
    json reasons = json::object();
    for (const auto& [name, why] : ex.none_reasons) reasons[name] = why;
    return "## " + ex.trial.nct_id + " Predicted " + std::to_string(ex.predicted) + ", should be " +
           std::to_string(ex.trial.label) + "\n\n### Features\n" + values.dump(2) +
           "\n\n### Reasons for features that are None\n" + reasons.dump(2);
}

Agents::Agents(AgentResources resources, AgentSettings settings, TaskSpec task)
    : res_(std::move(resources)), settings_(settings), task_(std::move(task)) {
    if (!res_.backend) throw std::invalid_argument("agents need a backend");
    if (!res_.prompts) throw std::invalid_argument("agents need a prompt library");
}

ChatRequest Agents::request(const std::string& prompt, const PromptVars& vars) const {
    const RenderedPrompt r = res_.prompts->render(prompt, vars);
    ChatRequest req;
    req.system = r.system;
    req.model_id = settings_.model_id;
    req.temperature = settings_.temperature;
    req.messages.push_back({Role::User, r.user});
    return req;
}

std::vector<FeatureIdea> Agents::propose_initial(const std::vector<TrialRecord>& positives,
                                                 const std::vector<TrialRecord>& negatives) const {
    const json zero_shot = complete_structured(*res_.backend, request("zero_shot_proposer", {{"task", task_.description}}),
                                               ideas_schema(false), settings_.max_retries);

    json factors = json::array();
    const ReactOptions opts{settings_.model_id, settings_.temperature, settings_.react_max_steps};
    auto run_factor = [&](const TrialRecord& trial) {
        const RenderedPrompt p = res_.prompts->render(
            "factor_proposer",
            {{"task", task_.description}, {"nct_id", trial.nct_id}, {"outcome", trial.label == 1 ? "success" : "failure"}});
        const ReactTrace trace = react_loop(*res_.backend, p.system, p.user, make_tools(res_.tools, trial), opts);
        auto parsed = extract_first_json(trace.final, ideas_schema(false));
        if (!parsed) throw UnparseableOutput("factor proposer for " + trial.nct_id + " gave no idea list", {trace.final});
        factors.push_back({{"nct_id", trial.nct_id}, {"outcome", trial.label}, {"factors", *parsed}});
    };
    for (const auto& t : positives) run_factor(t);
    for (const auto& t : negatives) run_factor(t);

    const json merged = complete_structured(*res_.backend,
                                            request("proposal_summarizer", {{"task", task_.description},
                                                                            {"zero_shot_ideas", zero_shot.dump(2)},
                                                                            {"factor_ideas", factors.dump(2)}}),
                                            ideas_schema(true), settings_.max_retries);
    auto ideas = ideas_from_json(merged);
    if (ideas.empty()) throw EmptyProposal("the proposal summarizer returned no feature ideas");
    return ideas;
}

ProposalAction Agents::propose_iterative(const Suggestion& suggestion, const PlanSet& active) const {
    std::string current;
    for (const auto& [name, plan] : active) current += "- " + name + ": " + plan.feature_idea + "\n";
    if (current.empty()) current = "(none)\n";
    ChatRequest req = request("iterative_proposer", {{"task", task_.description},
                                                     {"current_features", current},
                                                     {"suggestion", suggestion.text}});
    const Schema schema{"a JSON object with \"action\", \"feature_name\" and \"description\"", action_error};

    auto to_action = [&](const ParsedAction& p) -> std::optional<ProposalAction> {
        if (p.kind == "add") {
            std::set<std::string> taken;
            for (const auto& [name, plan] : active) taken.insert(name);
            return ProposalAction::add({unique_name(p.name, taken), p.description}, suggestion.origin);
        }
        if (!active.contains(p.name)) return std::nullopt;
        if (p.kind == "refine") return ProposalAction::refine({p.name, p.description}, suggestion.origin);
        return ProposalAction::remove(p.name, suggestion.origin);
    };

    std::string raw;
    ParsedAction parsed = parse_action(complete_structured(*res_.backend, req, schema, settings_.max_retries, &raw));
    if (auto action = to_action(parsed)) return *action;

    std::string names;
    for (const auto& [name, plan] : active) names += (names.empty() ? "" : ", ") + name;
    req.messages.push_back({Role::Assistant, raw});
    req.messages.push_back({Role::User, "The feature '" + parsed.name + "' is not in the current feature set (" +
                                            (names.empty() ? std::string("which is empty") : names) +
                                            "). \"refine\" and \"remove\" must name one of these features. "
                                            "Reply again with one JSON object."});
    parsed = parse_action(complete_structured(*res_.backend, req, schema, settings_.max_retries, &raw));
    if (auto action = to_action(parsed)) return *action;
    throw InvalidTarget("proposal targets unknown feature '" + parsed.name + "'");
}

FeaturePlan Agents::plan_feature(const FeatureIdea& idea) const {
    ChatRequest req = request("feature_planner", {{"task", task_.description},
                                                  {"feature_name", idea.feature_name},
                                                  {"idea", idea.description}});
    const Schema schema{"a JSON feature plan object with feature_type, possible_values and feature_instructions",
                        [&idea](const json& j) -> std::optional<std::string> {
                            try {
                                (void)parse_plan_reply(j, idea);
                                return std::nullopt;
                            } catch (const PlanParseError& e) {
                                return std::string(e.what());
                            }
                        }};
    std::string raw;
    FeaturePlan plan = parse_plan_reply(complete_structured(*res_.backend, req, schema, settings_.max_retries, &raw), idea);
    ValidationReport report = validate_plan(plan);
    if (report.empty()) return plan;

    req.messages.push_back({Role::Assistant, raw});
    req.messages.push_back({Role::User, "The plan is invalid: " + describe(report) +
                                            ". Every categorical or multicategorical sub-feature needs a non-empty "
                                            "list in possible_values, and possible_values may only name sub-features "
                                            "listed in feature_type. Reply again with the corrected JSON plan."});
    plan = parse_plan_reply(complete_structured(*res_.backend, req, schema, settings_.max_retries, &raw), idea);
    report = validate_plan(plan);
    if (!report.empty()) throw InvalidPlan("plan for " + idea.feature_name + " is invalid: " + describe(report));
    return plan;
}

std::vector<std::vector<std::string>> Agents::group_features(const std::vector<FeaturePlan>& plans) const {
    std::vector<std::string> names;
    for (const auto& p : plans) names.push_back(p.feature_name);
    if (names.size() <= 1) return repair_groups({}, names, settings_.max_group_size);

    json listing = json::array();
    for (const auto& p : plans) listing.push_back({{"feature_name", p.feature_name}, {"feature_idea", p.feature_idea}});
    const Schema schema{"a JSON array of arrays of feature names", [](const json& j) -> std::optional<std::string> {
                            if (!j.is_array()) return "expected a JSON array of groups";
                            for (const auto& g : j) {
                                if (!g.is_array()) return "every group must be an array of names";
                                for (const auto& n : g) {
                                    if (!n.is_string()) return "feature names must be strings";
                                }
                            }
                            return std::nullopt;
                        }};
    std::vector<std::vector<std::string>> proposed;
    try {
        const json reply = complete_structured(
            *res_.backend,
            request("feature_grouper",
                    {{"features", listing.dump(2)}, {"max_group_size", std::to_string(settings_.max_group_size)}}),
            schema, settings_.max_retries);
        for (const auto& g : reply) proposed.push_back(string_items(g));
    } catch (const UnparseableOutput&) {
        // Fall through: every feature becomes its own group.
    }
    return repair_groups(proposed, names, settings_.max_group_size);
}

FeatureValueSet Agents::build_group(const TrialRecord& trial, const std::vector<FeaturePlan>& group) const {
    FeatureValueSet out;
    out.nct_id = trial.nct_id;
    if (group.empty()) return out;
    const std::string plans_text = plans_json(group).dump(2);

    const RenderedPrompt research_prompt =
        res_.prompts->render("feature_researcher", {{"nct_id", trial.nct_id}, {"feature_plans", plans_text}});
    const ReactTrace research =
        react_loop(*res_.backend, research_prompt.system, research_prompt.user, make_tools(res_.tools, trial),
                   ReactOptions{settings_.model_id, settings_.temperature, settings_.react_max_steps});

    const Schema schema{"a JSON object with a \"feature_values\" object", [](const json& j) -> std::optional<std::string> {
                            if (!j.is_object()) return "expected a JSON object";
                            auto it = j.find("feature_values");
                            if (it == j.end() || !it->is_object()) return "missing \"feature_values\" object";
                            return std::nullopt;
                        }};
    json reply;
    try {
        reply = complete_structured(*res_.backend,
                                    request("feature_builder", {{"nct_id", trial.nct_id},
                                                                {"feature_plans", plans_text},
                                                                {"research", research.final}}),
                                    schema, settings_.max_retries);
    } catch (const UnparseableOutput&) {
        for (const auto& plan : group) {
            out.put(plan.feature_name, none_entry(plan, NoneCode::AgentFailure, "builder output could not be parsed"));
        }
        return out;
    }

    const json& values = reply.at("feature_values");
    const json explanations = reply.contains("explanations") && reply["explanations"].is_object()
                                  ? reply["explanations"]
                                  : json::object();
    for (const auto& plan : group) {
        std::string explanation;
        if (auto e = explanations.find(plan.feature_name); e != explanations.end()) {
            explanation = e->is_string() ? e->get<std::string>() : e->dump();
        }
        FeatureEntry entry;
        auto v = values.find(plan.feature_name);
        if (v == values.end()) {
            entry = none_entry(plan, NoneCode::Missing, explanation.empty() ? "builder omitted the feature" : explanation);
        } else if (is_none_marker(*v)) {
            entry = none_entry(plan, NoneCode::NoneReturned, explanation);
        } else {
            entry = coerce_value(*v, plan);
            if (!explanation.empty()) {
                for (auto& [sub, reason] : entry.reasons) {
                    if (reason.code == NoneCode::NoneReturned || reason.code == NoneCode::Missing) reason.detail = explanation;
                }
            }
        }
        out.put(plan.feature_name, entry);
    }
    return out;
}

std::vector<FeatureValueSet> Agents::build_features(const std::vector<TrialRecord>& trials,
                                                    const std::vector<FeaturePlan>& plans,
                                                    const std::vector<std::vector<std::string>>& groups) const {
    std::map<std::string, const FeaturePlan*> by_name;
    for (const auto& p : plans) by_name[p.feature_name] = &p;
    std::vector<std::vector<FeaturePlan>> group_plans;
    for (const auto& g : groups) {
        std::vector<FeaturePlan> members;
        for (const auto& n : g) {
            auto it = by_name.find(n);
            if (it == by_name.end()) throw std::invalid_argument("group names unknown feature " + n);
            members.push_back(*it->second);
        }
        group_plans.push_back(std::move(members));
    }
    std::vector<FeatureValueSet> out(trials.size());
    parallel_for(trials.size(), settings_.build_workers, [&](std::size_t i) {
        FeatureValueSet merged;
        merged.nct_id = trials[i].nct_id;
        for (const auto& members : group_plans) {
            FeatureValueSet part = build_group(trials[i], members);
            for (auto& [name, subs] : part.values) merged.values[name] = std::move(subs);
            for (auto& [name, why] : part.none_reasons) merged.none_reasons[name] = std::move(why);
        }
        out[i] = std::move(merged);
    });
    std::sort(out.begin(), out.end(),
              [](const FeatureValueSet& a, const FeatureValueSet& b) { return a.nct_id < b.nct_id; });
    return out;
}

namespace {

PromptVars evaluator_vars(const TaskSpec& task, const EvaluatorInput& input) {
    json importances = json::object();
    for (const auto& [name, v] : input.importances) importances[name] = v;
    return {{"task", task.description},
            {"metric_name", std::string(to_string(input.metric))},
            {"metric_score", format_score(input.metric_score)},
            {"features_with_plan", to_json(input.plans).dump(2)},
            {"feature_importances", importances.dump(2)}};
}

}  // namespace

std::vector<Suggestion> Agents::evaluate_model(const EvaluatorInput& input) const {
    const json reply = complete_structured(*res_.backend, request("model_evaluator", evaluator_vars(task_, input)),
                                           string_list_schema(), settings_.max_retries);
    std::vector<Suggestion> out;
    for (auto& text : string_items(reply)) {
        if (out.size() >= settings_.max_model_suggestions) break;
        out.push_back({std::move(text), Origin::ModelBased});
    }
    return out;
}

std::vector<Suggestion> Agents::evaluate_error(const EvaluatorInput& input, const MisclassifiedExample& example) const {
    PromptVars vars = evaluator_vars(task_, input);
    vars["example"] = render_example(example);
    const RenderedPrompt p = res_.prompts->render("error_evaluator", vars);
    const ReactTrace trace = react_loop(*res_.backend, p.system, p.user, make_tools(res_.tools, example.trial),
                                        ReactOptions{settings_.model_id, settings_.temperature, settings_.react_max_steps});
    std::vector<Suggestion> out;
    if (auto list = extract_first_json(trace.final, string_list_schema()); list && !list->empty()) {
        for (auto& text : string_items(*list)) out.push_back({std::move(text), Origin::ErrorBased});
        if (!out.empty()) return out;
    }
    std::string text = trim(trace.final);
    if (!text.empty()) out.push_back({std::move(text), Origin::ErrorBased});
    return out;
}

std::vector<Suggestion> Agents::evaluate(const EvaluatorInput& input,
                                         const std::vector<MisclassifiedExample>& examples) const {
    const auto model_based = evaluate_model(input);
    std::vector<std::vector<Suggestion>> error_based;
    for (const auto& ex : examples) error_based.push_back(evaluate_error(input, ex));
    return aggregate_suggestions(model_based, error_based, settings_.max_suggestions);
}

}  // namespace autoct
