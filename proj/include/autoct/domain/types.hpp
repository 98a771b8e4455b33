#pragma once

#include "autoct/domain/date.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace autoct {

enum class Phase { I, II, III, IV };

std::optional<Phase> parse_phase(std::string_view text);
std::string_view to_string(Phase p);

struct TrialRecord {
    std::string nct_id;
    int label = 0;
    Date start_date;
    std::optional<Phase> phase;
};

enum class Metric { RocAuc, PrAuc, F1 };

std::optional<Metric> parse_metric(std::string_view text);
std::string_view to_string(Metric m);

struct TaskSpec {
    std::string description;
    Metric metric = Metric::RocAuc;
};

struct FeatureIdea {
    std::string feature_name;
    std::string description;

    friend bool operator==(const FeatureIdea&, const FeatureIdea&) = default;
};

/// True when `name` matches [a-z][a-z0-9_]*.
bool is_valid_feature_name(std::string_view name);

/// Best-effort snake_case normalization of a free-text name ("Route of
/// Administration" -> "route_of_administration"). Always returns a valid name.
std::string to_feature_name(std::string_view text);

struct SearchConfig {
    int rollouts = 10;
    int max_depth = 10;
    double exploration_weight = 1.0;
    int n_factor_pos = 3;
    int n_factor_neg = 3;
    int n_error_examples = 3;
    std::uint64_t seed = 0;
    /// Ends the search once the best score reaches this value; disabled when empty.
    std::optional<double> stop_at_score;
    /// Upper bound on suggestions queued per node (model-based + error-based).
    int max_suggestions = 6;
};

}  // namespace autoct
