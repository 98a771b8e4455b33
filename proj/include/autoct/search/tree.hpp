#pragma once

#include "autoct/domain/errors.hpp"
#include "autoct/domain/plan.hpp"
#include "autoct/domain/proposal.hpp"

#include <nlohmann/json.hpp>

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace autoct {

/// No node can be expanded: every pending queue is empty or at the depth limit.
class SearchExhausted : public Error {
public:
    using Error::Error;
};

class DepthExceeded : public Error {
public:
    using Error::Error;
};

/// A checkpoint that cannot be read back: bad version, missing plans or hash mismatch.
class CorruptCheckpoint : public Error {
public:
    using Error::Error;
};

inline constexpr int kTreeFormatVersion = 1;

struct SearchNode {
    int id = 0;
    std::optional<int> parent;
    std::optional<ProposalAction> action;
    std::string plan_set_hash;
    double q = 0.0;
    long n = 0;
    double score = 0.0;
    int depth = 0;
    std::deque<Suggestion> pending;
    std::vector<int> children;
};

/// Selection value q/n + alpha*sqrt(ln(parent_n)/n); unvisited nodes get the
/// largest finite double so they are tried before any visited sibling.
double uct(double q, long n, long parent_n, double alpha);
double uct(const SearchNode& node, long parent_n, double alpha);

class SearchTree {
public:
    /// Creates the root from the initial plan set and its validation score.
    /// The root is not yet backpropagated.
    int add_root(PlanSet plans, double score, std::vector<Suggestion> suggestions);
    /// Adds a simulated child of `parent`; n and q start at zero.
    int add_child(int parent, ProposalAction action, PlanSet plans, double score, std::vector<Suggestion> suggestions);

    /// q += reward and n += 1 for the node and each ancestor.
    void backpropagate(int node, double reward);

    /// Descends from the root by argmax UCT (ties to the lower id) through
    /// children whose subtree can still be expanded, stopping at the first
    /// node with pending suggestions. Throws SearchExhausted.
    [[nodiscard]] std::vector<int> select(double alpha, int max_depth) const;
    [[nodiscard]] bool expandable(int node, int max_depth) const;

    [[nodiscard]] bool empty() const { return nodes_.empty(); }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const SearchNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    SearchNode& node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] const std::vector<SearchNode>& nodes() const { return nodes_; }
    [[nodiscard]] static constexpr int root() { return 0; }

    [[nodiscard]] const PlanSet& plans(int node) const;
    [[nodiscard]] const std::map<std::string, PlanSet>& plan_store() const { return plans_; }

    /// Highest score seen; the earliest node wins ties.
    [[nodiscard]] int best() const { return best_; }
    [[nodiscard]] double best_score() const { return node(best_).score; }

    /// Nodes with their pending queues; plan sets are referenced by hash.
    [[nodiscard]] nlohmann::json to_json() const;
    /// Rebuilds a tree from to_json() output and its plan store.
    static SearchTree from_json(const nlohmann::json& j, std::map<std::string, PlanSet> plans);

private:
    int insert(SearchNode node, PlanSet plans);

    std::vector<SearchNode> nodes_;
    std::map<std::string, PlanSet> plans_;
    int best_ = 0;
};

/// Writes <dir>/tree.json (with `extra` merged at the top level) and
/// <dir>/plans/<hash>.json for every plan set not yet stored.
void save_tree(const SearchTree& tree, const std::string& dir, const nlohmann::json& extra = nlohmann::json::object());

struct LoadedTree {
    SearchTree tree;
    nlohmann::json document;
};

/// Reads a checkpoint written by save_tree. Throws CorruptCheckpoint.
LoadedTree load_tree(const std::string& dir);

}  // namespace autoct
