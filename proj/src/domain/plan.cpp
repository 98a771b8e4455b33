#include "autoct/domain/plan.hpp"

#include "autoct/common/hash.hpp"
#include "autoct/common/text.hpp"
#include "autoct/domain/errors.hpp"

#include <set>

namespace autoct {

using nlohmann::json;

std::optional<FeatureType> parse_feature_type(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "integer" || t == "int") return FeatureType::Integer;
    if (t == "float" || t == "number") return FeatureType::Float;
    if (t == "boolean" || t == "bool") return FeatureType::Boolean;
    if (t == "categorical") return FeatureType::Categorical;
    if (t == "multicategorical" || t == "multi-categorical" || t == "multi_categorical") {
        return FeatureType::Multicategorical;
    }
    return std::nullopt;
}

std::string_view to_string(FeatureType t) {
    switch (t) {
        case FeatureType::Integer: return "integer";
        case FeatureType::Float: return "float";
        case FeatureType::Boolean: return "boolean";
        case FeatureType::Categorical: return "categorical";
        case FeatureType::Multicategorical: return "multicategorical";
    }
    return "?";
}

bool is_categorical(FeatureType t) {
    return t == FeatureType::Categorical || t == FeatureType::Multicategorical;
}

std::optional<DataSource> parse_data_source(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "pubmed") return DataSource::PubMed;
    if (t == "current_trial_summary") return DataSource::CurrentTrialSummary;
    if (t == "related_clinical_trials") return DataSource::RelatedClinicalTrials;
    return std::nullopt;
}

std::string_view to_string(DataSource s) {
    switch (s) {
        case DataSource::PubMed: return "pubmed";
        case DataSource::CurrentTrialSummary: return "current_trial_summary";
        case DataSource::RelatedClinicalTrials: return "related_clinical_trials";
    }
    return "?";
}

json to_json(const FeaturePlan& plan) {
    json types = json::object();
    for (const auto& [sub, t] : plan.feature_type) types[sub] = std::string(to_string(t));
    json sources = json::array();
    for (DataSource s : plan.data_sources) sources.push_back(std::string(to_string(s)));
    json possible = json::object();
    for (const auto& [sub, values] : plan.possible_values) possible[sub] = values;
    return json{
        {"feature_name", plan.feature_name},
        {"feature_idea", plan.feature_idea},
        {"feature_type", types},
        {"data_sources", sources},
        {"example_values", plan.example_values},
        {"possible_values", possible},
        {"feature_instructions", plan.feature_instructions},
    };
}

namespace {

std::string string_field(const json& j, const char* key, bool required) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) throw PlanParseError(std::string("plan is missing '") + key + "'");
        return {};
    }
    if (!it->is_string()) throw PlanParseError(std::string("plan field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::string scalar_as_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw PlanParseError("possible_values entries must be strings");
}

}  // namespace

FeaturePlan plan_from_json(const json& j) {
    if (!j.is_object()) throw PlanParseError("plan must be a JSON object");
    FeaturePlan plan;
    plan.feature_name = string_field(j, "feature_name", true);
    plan.feature_idea = string_field(j, "feature_idea", false);
    plan.feature_instructions = string_field(j, "feature_instructions", false);

    auto types = j.find("feature_type");
    if (types == j.end() || !types->is_object()) {
        throw PlanParseError("plan 'feature_type' must be an object of sub-feature types");
    }
    for (const auto& [sub, t] : types->items()) {
        if (!t.is_string()) throw PlanParseError("feature_type['" + sub + "'] must be a string");
        auto parsed = parse_feature_type(t.get<std::string>());
        if (!parsed) throw PlanParseError("unknown feature type '" + t.get<std::string>() + "'");
        plan.feature_type.emplace(sub, *parsed);
    }

    if (auto it = j.find("data_sources"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw PlanParseError("data_sources must be an array");
        for (const auto& s : *it) {
            if (!s.is_string()) throw PlanParseError("data_sources entries must be strings");
            auto parsed = parse_data_source(s.get<std::string>());
            if (!parsed) throw PlanParseError("unknown data source '" + s.get<std::string>() + "'");
            plan.data_sources.insert(*parsed);
        }
    }
    if (auto it = j.find("example_values"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw PlanParseError("example_values must be an array");
        plan.example_values.assign(it->begin(), it->end());
    }
    if (auto it = j.find("possible_values"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw PlanParseError("possible_values must be an object");
        for (const auto& [sub, values] : it->items()) {
            if (!values.is_array()) throw PlanParseError("possible_values['" + sub + "'] must be an array");
            std::vector<std::string> out;
            for (const auto& v : values) out.push_back(scalar_as_string(v));
            plan.possible_values.emplace(sub, std::move(out));
        }
    }
    return plan;
}

json to_json(const PlanSet& plans) {
    json out = json::object();
    for (const auto& [name, plan] : plans) out[name] = to_json(plan);
    return out;
}

PlanSet plan_set_from_json(const json& j) {
    if (!j.is_object()) throw PlanParseError("plan set must be a JSON object");
    PlanSet plans;
    for (const auto& [name, pj] : j.items()) {
        FeaturePlan plan = plan_from_json(pj);
        if (plan.feature_name != name) {
            throw PlanParseError("plan set key '" + name + "' does not match feature_name '" +
                                 plan.feature_name + "'");
        }
        plans.emplace(name, std::move(plan));
    }
    return plans;
}

std::string plan_hash(const FeaturePlan& plan) { return sha256_hex(to_json(plan).dump()); }

std::string plan_set_hash(const PlanSet& plans) { return sha256_hex(to_json(plans).dump()); }

std::string_view to_string(ViolationCode c) {
    switch (c) {
        case ViolationCode::InvalidName: return "INVALID_NAME";
        case ViolationCode::EmptyFeatureType: return "EMPTY_FEATURE_TYPE";
        case ViolationCode::UnknownSubfeature: return "UNKNOWN_SUBFEATURE";
        case ViolationCode::MissingCategories: return "MISSING_CATEGORIES";
        case ViolationCode::UnexpectedCategories: return "UNEXPECTED_CATEGORIES";
        case ViolationCode::DuplicateCategory: return "DUPLICATE_CATEGORY";
    }
    return "?";
}

ValidationReport validate_plan(const FeaturePlan& plan) {
    ValidationReport report;
    if (!is_valid_feature_name(plan.feature_name)) {
        report.push_back({ViolationCode::InvalidName,
                          "feature_name '" + plan.feature_name + "' must match [a-z][a-z0-9_]*"});
    }
    if (plan.feature_type.empty()) {
        report.push_back({ViolationCode::EmptyFeatureType, "feature_type declares no sub-features"});
    }
    for (const auto& [sub, values] : plan.possible_values) {
        if (!plan.feature_type.contains(sub)) {
            report.push_back({ViolationCode::UnknownSubfeature,
                              "possible_values key '" + sub + "' is not declared in feature_type"});
        }
    }
    for (const auto& [sub, type] : plan.feature_type) {
        auto it = plan.possible_values.find(sub);
        const bool has_values = it != plan.possible_values.end() && !it->second.empty();
        if (is_categorical(type) && !has_values) {
            report.push_back({ViolationCode::MissingCategories,
                              "sub-feature '" + sub + "' is " + std::string(to_string(type)) +
                                  " but has no possible_values"});
        }
        if (!is_categorical(type) && has_values) {
            report.push_back({ViolationCode::UnexpectedCategories,
                              "sub-feature '" + sub + "' is " + std::string(to_string(type)) +
                                  " and must not list possible_values"});
        }
        if (has_values) {
            std::set<std::string> seen;
            for (const auto& v : it->second) {
                if (!seen.insert(v).second) {
                    report.push_back({ViolationCode::DuplicateCategory,
                                      "sub-feature '" + sub + "' lists '" + v + "' twice"});
                }
            }
        }
    }
    return report;
}

std::string describe(const ValidationReport& report) {
    std::string out;
    for (const auto& v : report) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(v.code)) + ": " + v.detail;
    }
    return out;
}

}  // namespace autoct
