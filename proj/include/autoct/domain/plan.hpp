#pragma once

#include "autoct/domain/types.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace autoct {

enum class FeatureType { Integer, Float, Boolean, Categorical, Multicategorical };

/// Accepts the canonical names plus the "multi-categorical" spelling planners emit.
std::optional<FeatureType> parse_feature_type(std::string_view text);
std::string_view to_string(FeatureType t);
bool is_categorical(FeatureType t);

enum class DataSource { PubMed, CurrentTrialSummary, RelatedClinicalTrials };

std::optional<DataSource> parse_data_source(std::string_view text);
std::string_view to_string(DataSource s);

/// Executable schema and instructions for constructing one feature.
struct FeaturePlan {
    std::string feature_name;
    std::string feature_idea;
    std::map<std::string, FeatureType> feature_type;
    std::set<DataSource> data_sources;
    std::vector<nlohmann::json> example_values;
    std::map<std::string, std::vector<std::string>> possible_values;
    std::string feature_instructions;

    friend bool operator==(const FeaturePlan&, const FeaturePlan&) = default;
};

/// Active feature set keyed by feature name.
using PlanSet = std::map<std::string, FeaturePlan>;

nlohmann::json to_json(const FeaturePlan& plan);
/// Throws PlanParseError on structural problems (missing keys, unknown type names).
FeaturePlan plan_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PlanSet& plans);
PlanSet plan_set_from_json(const nlohmann::json& j);

/// Content digests over the canonical JSON form.
std::string plan_hash(const FeaturePlan& plan);
std::string plan_set_hash(const PlanSet& plans);

enum class ViolationCode {
    InvalidName,
    EmptyFeatureType,
    UnknownSubfeature,
    MissingCategories,
    UnexpectedCategories,
    DuplicateCategory,
};

std::string_view to_string(ViolationCode c);

struct Violation {
    ViolationCode code;
    std::string detail;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_plan(const FeaturePlan& plan);
std::string describe(const ValidationReport& report);

}  // namespace autoct
