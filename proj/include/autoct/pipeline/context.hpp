#pragma once

#include "autoct/agents/agents.hpp"
#include "autoct/modeling/bundle.hpp"
#include "autoct/modeling/design_matrix.hpp"
#include "autoct/pipeline/config.hpp"
#include "autoct/pipeline/run_dir.hpp"
#include "autoct/search/mcts.hpp"

#include <atomic>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace autoct {

/// A test-set trial reached an agent before the search finished.
class TestIsolationViolation : public Error {
public:
    using Error::Error;
};

struct Samples {
    std::vector<TrialRecord> train;
    std::vector<TrialRecord> valid;
    std::vector<TrialRecord> test;
};

/// Built feature values, stored per build batch under <run>/values/<hash>.json.
/// A batch is the list of plans one researcher/builder call handles; values
/// are never rebuilt once stored.
class FeatureStore {
public:
    FeatureStore(const Agents& agents, std::string dir);

    /// Loads every stored batch from the directory.
    void load();

    /// Builds whatever is missing for `plans` x `trials`. New plans are
    /// grouped (one batch per group); existing batches are extended with the
    /// missing trials.
    void ensure(const std::vector<FeaturePlan>& plans, const std::vector<TrialRecord>& trials);

    /// Values of exactly `plans` for each trial, in trial order.
    [[nodiscard]] std::vector<FeatureValueSet> values(const PlanSet& plans, const std::vector<TrialRecord>& trials) const;

    [[nodiscard]] std::size_t batch_count() const { return batches_.size(); }

private:
    struct Batch {
        std::string hash;
        std::vector<FeaturePlan> plans;
        std::map<std::string, FeatureValueSet> values;
    };

    void save(const Batch& batch) const;
    Batch* find_batch(const std::string& plan_digest);

    const Agents& agents_;
    std::string dir_;
    std::vector<Batch> batches_;
    /// plan_hash -> index into batches_
    std::map<std::string, std::size_t> owner_;
};

/// A trained and scored feature set.
struct NodeModel {
    DesignMatrix train;
    DesignMatrix valid;
    ModelBundle bundle;
    double score = 0.0;
};

/// Seed used to train every node's bundle.
std::uint64_t training_seed(std::uint64_t run_seed);

/// Trains the three models on `train` and selects on `valid`. Pure.
NodeModel train_node(DesignMatrix train, DesignMatrix valid, const Samples& samples, Metric metric,
                     std::uint64_t run_seed);

/// Feature name -> importance of the selected model.
std::map<std::string, double> feature_importances(const NodeModel& model);

/// Counters gathered through the tool observer.
struct ToolAudit {
    std::atomic<std::size_t> calls{0};
    std::atomic<std::size_t> documents{0};
    std::atomic<std::size_t> own_records{0};
    std::atomic<std::size_t> cutoff_violations{0};
    std::atomic<std::size_t> test_subjects{0};
};

/// Drives the agents and models for the search.
class PipelineContext final : public SearchContext {
public:
    PipelineContext(const RunConfig& config, RunPaths paths, const Agents& agents, FeatureStore& store, Samples samples);

    Simulation initialize() override;
    std::optional<Expansion> expand(const SearchTree& tree, int parent, const Suggestion& suggestion) override;
    void checkpoint(const SearchTree& tree, int rollouts_done) override;

    /// Trains and scores a plan set, building missing values first; writes
    /// its feature CSV.
    NodeModel simulate(const PlanSet& plans);

    /// Builds test-set values for `plans` and writes the test feature CSV.
    /// Only allowed after unseal_test().
    void build_test_features(const PlanSet& plans);
    void unseal_test() { test_sealed_ = false; }

    std::function<void(const SearchTree&, int)> on_checkpoint;

private:
    std::vector<Suggestion> suggestions_for(const PlanSet& plans, const NodeModel& model, int node_id);
    void guard_trials(const std::vector<TrialRecord>& trials) const;

    const RunConfig& config_;
    RunPaths paths_;
    const Agents& agents_;
    FeatureStore& store_;
    Samples samples_;
    std::set<std::string> test_ids_;
    bool test_sealed_ = true;
};

/// Merges a config's search settings into the final status block stored in tree.json.
nlohmann::json checkpoint_extra(int rollouts_done, std::string_view status);

}  // namespace autoct
