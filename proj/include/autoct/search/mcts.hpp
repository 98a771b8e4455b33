#pragma once

#include "autoct/domain/types.hpp"
#include "autoct/search/tree.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace autoct {

/// One trained and scored feature set.
struct Simulation {
    PlanSet plans;
    double score = 0.0;
    /// Evaluator output for the new model; becomes the node's pending queue.
    std::vector<Suggestion> suggestions;
};

struct Expansion {
    ProposalAction action;
    Simulation simulation;
};

/// What the search needs from the rest of the pipeline.
class SearchContext {
public:
    virtual ~SearchContext() = default;
    /// Builds, trains and scores the initial feature set.
    virtual Simulation initialize() = 0;
    /// Turns one suggestion at `parent` into a scored child state. Agent
    /// errors (other than BackendFailure) may be thrown or signalled by
    /// returning nullopt; either way the expansion is skipped.
    virtual std::optional<Expansion> expand(const SearchTree& tree, int parent, const Suggestion& suggestion) = 0;
    /// Called after initialization (rollouts_done = 0) and after every rollout.
    virtual void checkpoint(const SearchTree& /*tree*/, int /*rollouts_done*/) {}
};

enum class SearchStatus { Completed, Exhausted, ReachedTarget, Failed };

std::string_view to_string(SearchStatus s);
std::optional<SearchStatus> parse_search_status(std::string_view text);

struct SearchResult {
    SearchTree tree;
    int rollouts_done = 0;
    SearchStatus status = SearchStatus::Completed;
    /// Message of the fatal backend error when status is Failed.
    std::string failure;
};

/// Pops the next pending suggestion of `node` and simulates it. Returns the
/// new child (not yet backpropagated) or nullopt when the expansion was
/// skipped. Throws DepthExceeded at the depth limit; BackendFailure propagates.
std::optional<int> expand_and_simulate(SearchTree& tree, int node, SearchContext& ctx, const SearchConfig& config);

/// Initialization followed by up to config.rollouts iterations of
/// select, expand_and_simulate and backpropagate. A BackendFailure during a
/// rollout ends the search with status Failed and the tree so far; during
/// initialization it propagates.
SearchResult run_search(const SearchConfig& config, SearchContext& ctx);

/// Continues a checkpointed search that already completed `rollouts_done` rollouts.
SearchResult resume_search(const SearchConfig& config, SearchContext& ctx, SearchTree tree, int rollouts_done);

}  // namespace autoct
