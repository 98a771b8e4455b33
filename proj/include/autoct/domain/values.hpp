#pragma once

#include "autoct/domain/plan.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace autoct {

/// A built sub-feature value. The alternative held always matches the
/// declared FeatureType: Integer -> int64, Float -> double, Boolean -> bool,
/// Categorical -> string, Multicategorical -> vector<string>.
using FeatureValue = std::variant<std::int64_t, double, bool, std::string, std::vector<std::string>>;

/// Sub-feature name -> value; std::nullopt stands for None.
using SubFeatureValues = std::map<std::string, std::optional<FeatureValue>>;

enum class NoneCode { Missing, NoneReturned, TypeMismatch, NotInCategories, AgentFailure };

std::string_view to_string(NoneCode c);

struct NoneReason {
    NoneCode code;
    std::string detail;
};

/// Coerced output for one feature of one trial.
struct FeatureEntry {
    SubFeatureValues values;
    std::map<std::string, NoneReason> reasons;  // populated exactly for None sub-features
};

/// Coerces a raw builder object onto the plan's declared types. Total: every
/// sub-feature of `plan.feature_type` gets a value or a None with a reason.
FeatureEntry coerce_value(const nlohmann::json& raw, const FeaturePlan& plan);

/// Entry with every sub-feature None for the same reason.
FeatureEntry none_entry(const FeaturePlan& plan, NoneCode code, const std::string& detail);

struct FeatureValueSet {
    std::string nct_id;
    std::map<std::string, SubFeatureValues> values;
    std::map<std::string, std::string> none_reasons;

    void put(const std::string& feature, const FeatureEntry& entry);
};

nlohmann::json to_json(const FeatureValue& v);
nlohmann::json to_json(const SubFeatureValues& values);

/// Inverse of to_json: integers, reals, booleans, strings and string
/// arrays; null is None. Throws PlanParseError on anything else.
std::optional<FeatureValue> feature_value_from_json(const nlohmann::json& j);
SubFeatureValues sub_values_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FeatureValueSet& set);
FeatureValueSet value_set_from_json(const nlohmann::json& j);

}  // namespace autoct
