#include "autoct/domain/values.hpp"

#include "autoct/common/text.hpp"
#include "autoct/domain/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace autoct {

using nlohmann::json;

std::string_view to_string(NoneCode c) {
    switch (c) {
        case NoneCode::Missing: return "MISSING";
        case NoneCode::NoneReturned: return "NONE_RETURNED";
        case NoneCode::TypeMismatch: return "TYPE_MISMATCH";
        case NoneCode::NotInCategories: return "NOT_IN_CATEGORIES";
        case NoneCode::AgentFailure: return "AGENT_FAILURE";
    }
    return "?";
}

namespace {

struct Outcome {
    std::optional<FeatureValue> value;
    NoneReason reason{NoneCode::TypeMismatch, ""};
};

Outcome fail(NoneCode code, std::string detail) { return {std::nullopt, {code, std::move(detail)}}; }

bool is_none_literal(const json& v) {
    if (v.is_null()) return true;
    if (!v.is_string()) return false;
    const std::string s = to_lower(trim(v.get<std::string>()));
    return s == "none" || s == "null";
}

std::optional<std::int64_t> parse_int(const std::string& text) {
    const std::string t = trim(text);
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return out;
}

std::optional<double> parse_double(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (errno != 0 || end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

Outcome coerce_integer(const json& v) {
    if (v.is_number_integer()) return {v.get<std::int64_t>(), {}};
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9.0e15) {
            return {static_cast<std::int64_t>(d), {}};
        }
        return fail(NoneCode::TypeMismatch, "expected an integer, got " + v.dump());
    }
    if (v.is_string()) {
        if (auto i = parse_int(v.get<std::string>())) return {*i, {}};
    }
    return fail(NoneCode::TypeMismatch, "expected an integer, got " + v.dump());
}

Outcome coerce_float(const json& v) {
    if (v.is_number()) {
        const double d = v.get<double>();
        if (std::isfinite(d)) return {d, {}};
    }
    if (v.is_string()) {
        if (auto d = parse_double(v.get<std::string>())) return {*d, {}};
    }
    return fail(NoneCode::TypeMismatch, "expected a number, got " + v.dump());
}

Outcome coerce_boolean(const json& v) {
    if (v.is_boolean()) return {v.get<bool>(), {}};
    if (v.is_string()) {
        const std::string s = trim(v.get<std::string>());
        if (iequals(s, "true")) return {true, {}};
        if (iequals(s, "false")) return {false, {}};
    }
    return fail(NoneCode::TypeMismatch, "expected a boolean, got " + v.dump());
}

/// Canonical spelling of `v` within `categories`: exact match first, then
/// case-insensitive after trimming.
std::optional<std::string> match_category(const json& v, const std::vector<std::string>& categories) {
    std::string text;
    if (v.is_string()) {
        text = v.get<std::string>();
    } else if (v.is_number_integer() || v.is_boolean()) {
        text = v.dump();
    } else {
        return std::nullopt;
    }
    if (std::find(categories.begin(), categories.end(), text) != categories.end()) return text;
    const std::string t = trim(text);
    for (const auto& c : categories) {
        if (iequals(trim(c), t)) return c;
    }
    return std::nullopt;
}

std::string category_list(const std::vector<std::string>& categories) {
    std::string out;
    for (const auto& c : categories) {
        if (!out.empty()) out += ", ";
        out += c;
    }
    return out;
}

Outcome coerce_categorical(const json& v, const std::vector<std::string>& categories) {
    if (auto m = match_category(v, categories)) return {*m, {}};
    if (!v.is_string() && !v.is_number_integer() && !v.is_boolean()) {
        return fail(NoneCode::TypeMismatch, "expected a category string, got " + v.dump());
    }
    return fail(NoneCode::NotInCategories,
                v.dump() + " is not one of the predefined categories (" + category_list(categories) + ")");
}

Outcome coerce_multicategorical(const json& v, const std::vector<std::string>& categories) {
    std::vector<json> items;
    if (v.is_array()) {
        items.assign(v.begin(), v.end());
    } else if (v.is_string()) {
        items.push_back(v);
    } else {
        return fail(NoneCode::TypeMismatch, "expected a list of categories, got " + v.dump());
    }
    std::vector<bool> chosen(categories.size(), false);
    for (const auto& item : items) {
        auto m = match_category(item, categories);
        if (!m) {
            return fail(NoneCode::NotInCategories,
                        item.dump() + " is not one of the predefined categories (" +
                            category_list(categories) + ")");
        }
        auto pos = std::find(categories.begin(), categories.end(), *m) - categories.begin();
        chosen[static_cast<std::size_t>(pos)] = true;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (chosen[i]) out.push_back(categories[i]);
    }
    return {out, {}};
}

Outcome coerce_one(const json& v, FeatureType type, const std::vector<std::string>& categories) {
    if (is_none_literal(v)) return fail(NoneCode::NoneReturned, "builder returned None");
    switch (type) {
        case FeatureType::Integer: return coerce_integer(v);
        case FeatureType::Float: return coerce_float(v);
        case FeatureType::Boolean: return coerce_boolean(v);
        case FeatureType::Categorical: return coerce_categorical(v, categories);
        case FeatureType::Multicategorical: return coerce_multicategorical(v, categories);
    }
    return fail(NoneCode::TypeMismatch, "unsupported type");
}

}  // namespace

FeatureEntry coerce_value(const json& raw, const FeaturePlan& plan) {
    static const std::vector<std::string> kNoCategories;
    FeatureEntry entry;
    // A bare scalar is accepted for single-sub-feature plans.
    json object = raw;
    if (!raw.is_object() && plan.feature_type.size() == 1) {
        object = json{{plan.feature_type.begin()->first, raw}};
    }
    for (const auto& [sub, type] : plan.feature_type) {
        auto cats = plan.possible_values.find(sub);
        const auto& categories = cats == plan.possible_values.end() ? kNoCategories : cats->second;
        if (!object.is_object() || !object.contains(sub)) {
            entry.values[sub] = std::nullopt;
            entry.reasons[sub] = {NoneCode::Missing, "no value provided for '" + sub + "'"};
            continue;
        }
        Outcome out = coerce_one(object.at(sub), type, categories);
        entry.values[sub] = out.value;
        if (!out.value) entry.reasons[sub] = out.reason;
    }
    return entry;
}

FeatureEntry none_entry(const FeaturePlan& plan, NoneCode code, const std::string& detail) {
    FeatureEntry entry;
    for (const auto& [sub, type] : plan.feature_type) {
        (void)type;
        entry.values[sub] = std::nullopt;
        entry.reasons[sub] = {code, detail};
    }
    return entry;
}

void FeatureValueSet::put(const std::string& feature, const FeatureEntry& entry) {
    values[feature] = entry.values;
    if (entry.reasons.empty()) {
        none_reasons.erase(feature);
        return;
    }
    std::string text;
    for (const auto& [sub, reason] : entry.reasons) {
        if (!text.empty()) text += "; ";
        text += sub + ": " + std::string(to_string(reason.code));
        if (!reason.detail.empty()) text += " (" + reason.detail + ")";
    }
    none_reasons[feature] = text;
}

json to_json(const FeatureValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

json to_json(const SubFeatureValues& values) {
    json out = json::object();
    for (const auto& [sub, v] : values) out[sub] = v ? to_json(*v) : json(nullptr);
    return out;
}

std::optional<FeatureValue> feature_value_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_boolean()) return FeatureValue(j.get<bool>());
    if (j.is_number_integer()) return FeatureValue(j.get<std::int64_t>());
    if (j.is_number_float()) return FeatureValue(j.get<double>());
    if (j.is_string()) return FeatureValue(j.get<std::string>());
    if (j.is_array()) {
        std::vector<std::string> items;
        for (const auto& e : j) {
            if (!e.is_string()) throw PlanParseError("stored list value holds a non-string");
            items.push_back(e.get<std::string>());
        }
        return FeatureValue(std::move(items));
    }
    throw PlanParseError("stored feature value has unsupported type: " + j.dump());
}

SubFeatureValues sub_values_from_json(const json& j) {
    if (!j.is_object()) throw PlanParseError("stored sub-feature values must be an object");
    SubFeatureValues out;
    for (const auto& [sub, v] : j.items()) out[sub] = feature_value_from_json(v);
    return out;
}

json to_json(const FeatureValueSet& set) {
    json values = json::object();
    for (const auto& [name, subs] : set.values) values[name] = to_json(subs);
    return {{"nct_id", set.nct_id}, {"values", values}, {"none_reasons", set.none_reasons}};
}

FeatureValueSet value_set_from_json(const json& j) {
    try {
        FeatureValueSet out;
        out.nct_id = j.at("nct_id").get<std::string>();
        for (const auto& [name, subs] : j.at("values").items()) out.values[name] = sub_values_from_json(subs);
        out.none_reasons = j.at("none_reasons").get<std::map<std::string, std::string>>();
        return out;
    } catch (const json::exception& e) {
        throw PlanParseError(std::string("malformed stored value set: ") + e.what());
    }
}

}  // namespace autoct
