#include "autoct/search/mcts.hpp"

#include "autoct/llm/backend.hpp"

#include <spdlog/spdlog.h>

namespace autoct {

std::string_view to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Completed: return "completed";
        case SearchStatus::Exhausted: return "exhausted";
        case SearchStatus::ReachedTarget: return "reached_target";
        case SearchStatus::Failed: return "failed";
    }
    return "completed";
}

std::optional<SearchStatus> parse_search_status(std::string_view text) {
    for (auto s : {SearchStatus::Completed, SearchStatus::Exhausted, SearchStatus::ReachedTarget, SearchStatus::Failed}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::optional<int> expand_and_simulate(SearchTree& tree, int node, SearchContext& ctx, const SearchConfig& config) {
    if (tree.node(node).depth >= config.max_depth) {
        throw DepthExceeded("node " + std::to_string(node) + " is at the depth limit " + std::to_string(config.max_depth));
    }
    if (tree.node(node).pending.empty()) throw std::invalid_argument("node has no pending suggestion");
    const Suggestion suggestion = tree.node(node).pending.front();
    tree.node(node).pending.pop_front();

    std::optional<Expansion> expansion;
    try {
        expansion = ctx.expand(tree, node, suggestion);
    } catch (const BackendFailure&) {
        // Put the suggestion back so a resumed run retries it.
        tree.node(node).pending.push_front(suggestion);
        throw;
    } catch (const Error& e) {
        spdlog::warn("expansion of node {} skipped: {}", node, e.what());
        return std::nullopt;
    }
    if (!expansion) {
        spdlog::warn("expansion of node {} skipped", node);
        return std::nullopt;
    }
    auto& sim = expansion->simulation;
    const int child = tree.add_child(node, std::move(expansion->action), std::move(sim.plans), sim.score,
                                     std::move(sim.suggestions));
    spdlog::info("node {} <- {}: {} score {:.4f}", child, node, tree.node(child).action->summary(), sim.score);
    return child;
}

namespace {

bool reached(const SearchConfig& config, const SearchTree& tree) {
    return config.stop_at_score && tree.best_score() >= *config.stop_at_score;
}

}  // namespace

SearchResult resume_search(const SearchConfig& config, SearchContext& ctx, SearchTree tree, int rollouts_done) {
    SearchResult result{std::move(tree), rollouts_done, SearchStatus::Completed, {}};
    SearchTree& t = result.tree;
    if (reached(config, t)) {
        result.status = SearchStatus::ReachedTarget;
        return result;
    }
    while (result.rollouts_done < config.rollouts) {
        std::vector<int> path;
        try {
            path = t.select(config.exploration_weight, config.max_depth);
        } catch (const SearchExhausted& e) {
            spdlog::info("search exhausted after {} rollouts: {}", result.rollouts_done, e.what());
            result.status = SearchStatus::Exhausted;
            return result;
        }
        try {
            if (auto child = expand_and_simulate(t, path.back(), ctx, config)) {
                t.backpropagate(*child, t.node(*child).score);
            }
        } catch (const BackendFailure& e) {
            spdlog::error("backend failure in rollout {}: {}", result.rollouts_done + 1, e.what());
            result.status = SearchStatus::Failed;
            result.failure = e.what();
            return result;
        }
        ++result.rollouts_done;
        ctx.checkpoint(t, result.rollouts_done);
        if (reached(config, t)) {
            result.status = SearchStatus::ReachedTarget;
            return result;
        }
    }
    return result;
}

SearchResult run_search(const SearchConfig& config, SearchContext& ctx) {
    Simulation init = ctx.initialize();
    SearchTree tree;
    const int root = tree.add_root(std::move(init.plans), init.score, std::move(init.suggestions));
    tree.backpropagate(root, tree.node(root).score);
    spdlog::info("root score {:.4f} with {} features", tree.node(root).score, tree.plans(root).size());
    ctx.checkpoint(tree, 0);
    return resume_search(config, ctx, std::move(tree), 0);
}

}  // namespace autoct
