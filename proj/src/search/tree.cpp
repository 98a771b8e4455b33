#include "autoct/search/tree.hpp"

#include "autoct/common/text.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

namespace autoct {

using nlohmann::json;
namespace fs = std::filesystem;

double uct(double q, long n, long parent_n, double alpha) {
    if (n <= 0) return std::numeric_limits<double>::max();
    const double nn = static_cast<double>(n);
    return q / nn + alpha * std::sqrt(std::log(static_cast<double>(parent_n)) / nn);
}

double uct(const SearchNode& node, long parent_n, double alpha) { return uct(node.q, node.n, parent_n, alpha); }

int SearchTree::insert(SearchNode node, PlanSet plans) {
    node.id = static_cast<int>(nodes_.size());
    node.plan_set_hash = plan_set_hash(plans);
    plans_.try_emplace(node.plan_set_hash, std::move(plans));
    nodes_.push_back(std::move(node));
    const int id = nodes_.back().id;
    if (nodes_.back().score > nodes_[static_cast<std::size_t>(best_)].score) best_ = id;
    return id;
}

int SearchTree::add_root(PlanSet plans, double score, std::vector<Suggestion> suggestions) {
    if (!nodes_.empty()) throw std::logic_error("search tree already has a root");
    SearchNode node;
    node.score = score;
    node.pending.assign(suggestions.begin(), suggestions.end());
    best_ = 0;
    return insert(std::move(node), std::move(plans));
}

int SearchTree::add_child(int parent, ProposalAction action, PlanSet plans, double score,
                          std::vector<Suggestion> suggestions) {
    SearchNode node;
    node.parent = parent;
    node.action = std::move(action);
    node.score = score;
    node.depth = this->node(parent).depth + 1;
    node.pending.assign(suggestions.begin(), suggestions.end());
    const int id = insert(std::move(node), std::move(plans));
    this->node(parent).children.push_back(id);
    return id;
}

void SearchTree::backpropagate(int id, double reward) {
    std::optional<int> cur = id;
    while (cur) {
        SearchNode& n = node(*cur);
        n.q += reward;
        n.n += 1;
        cur = n.parent;
    }
}

bool SearchTree::expandable(int id, int max_depth) const {
    const SearchNode& n = node(id);
    if (!n.pending.empty() && n.depth < max_depth) return true;
    for (int c : n.children) {
        if (expandable(c, max_depth)) return true;
    }
    return false;
}

std::vector<int> SearchTree::select(double alpha, int max_depth) const {
    if (nodes_.empty()) throw SearchExhausted("search tree is empty");
    if (!expandable(root(), max_depth)) throw SearchExhausted("no node has pending suggestions within the depth limit");
    std::vector<int> path{root()};
    for (;;) {
        const SearchNode& cur = node(path.back());
        if (!cur.pending.empty() && cur.depth < max_depth) return path;
        int chosen = -1;
        double best_value = -std::numeric_limits<double>::infinity();
        for (int c : cur.children) {
            if (!expandable(c, max_depth)) continue;
            const double v = uct(node(c), cur.n, alpha);
            if (v > best_value) {
                best_value = v;
                chosen = c;
            }
        }
        path.push_back(chosen);
    }
}

const PlanSet& SearchTree::plans(int id) const { return plans_.at(node(id).plan_set_hash); }

json SearchTree::to_json() const {
    json nodes = json::array();
    for (const auto& n : nodes_) {
        json pending = json::array();
        for (const auto& s : n.pending) pending.push_back(autoct::to_json(s));
        nodes.push_back({{"id", n.id},
                         {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                         {"action", n.action ? autoct::to_json(*n.action) : json(nullptr)},
                         {"plan_set_hash", n.plan_set_hash},
                         {"q", n.q},
                         {"n", n.n},
                         {"score", n.score},
                         {"depth", n.depth},
                         {"children", n.children},
                         {"pending_count", n.pending.size()},
                         {"pending", pending}});
    }
    return {{"format_version", kTreeFormatVersion}, {"best", {{"id", best_}, {"score", nodes_.empty() ? 0.0 : best_score()}}},
            {"nodes", nodes}};
}

SearchTree SearchTree::from_json(const json& j, std::map<std::string, PlanSet> plans) {
    try {
        if (j.at("format_version").get<int>() != kTreeFormatVersion) {
            throw CorruptCheckpoint("unsupported tree format version " + j.at("format_version").dump());
        }
        SearchTree tree;
        for (const auto& jn : j.at("nodes")) {
            SearchNode n;
            n.id = jn.at("id").get<int>();
            if (n.id != static_cast<int>(tree.nodes_.size())) throw CorruptCheckpoint("node ids are not dense");
            if (!jn.at("parent").is_null()) n.parent = jn.at("parent").get<int>();
            if (!jn.at("action").is_null()) n.action = action_from_json(jn.at("action"));
            n.plan_set_hash = jn.at("plan_set_hash").get<std::string>();
            n.q = jn.at("q").get<double>();
            n.n = jn.at("n").get<long>();
            n.score = jn.at("score").get<double>();
            n.depth = jn.at("depth").get<int>();
            n.children = jn.at("children").get<std::vector<int>>();
            for (const auto& s : jn.at("pending")) n.pending.push_back(suggestion_from_json(s));
            auto it = plans.find(n.plan_set_hash);
            if (it == plans.end()) throw CorruptCheckpoint("missing plan set " + n.plan_set_hash);
            if (plan_set_hash(it->second) != n.plan_set_hash) {
                throw CorruptCheckpoint("plan set content does not match hash " + n.plan_set_hash);
            }
            tree.plans_.insert(*it);
            tree.nodes_.push_back(std::move(n));
        }
        tree.best_ = j.at("best").at("id").get<int>();
        if (!tree.nodes_.empty() && (tree.best_ < 0 || tree.best_ >= static_cast<int>(tree.nodes_.size()))) {
            throw CorruptCheckpoint("best node out of range");
        }
        return tree;
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("malformed tree checkpoint: ") + e.what());
    } catch (const PlanParseError& e) {
        throw CorruptCheckpoint(std::string("malformed action in tree checkpoint: ") + e.what());
    } catch (const ProposalError& e) {
        throw CorruptCheckpoint(std::string("malformed action in tree checkpoint: ") + e.what());
    }
}

void save_tree(const SearchTree& tree, const std::string& dir, const json& extra) {
    const fs::path plans_dir = fs::path(dir) / "plans";
    fs::create_directories(plans_dir);
    for (const auto& [hash, plans] : tree.plan_store()) {
        const fs::path p = plans_dir / (hash + ".json");
        if (!fs::exists(p)) write_file_atomic(p.string(), to_json(plans).dump(2) + "\n");
    }
    json doc = tree.to_json();
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    write_file_atomic((fs::path(dir) / "tree.json").string(), doc.dump(2) + "\n");
}

LoadedTree load_tree(const std::string& dir) {
    const fs::path tree_path = fs::path(dir) / "tree.json";
    if (!fs::exists(tree_path)) throw CorruptCheckpoint("no tree.json in " + dir);
    json doc;
    try {
        doc = json::parse(read_file(tree_path.string()));
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("tree.json is not valid JSON: ") + e.what());
    }
    std::map<std::string, PlanSet> plans;
    if (doc.contains("nodes") && doc["nodes"].is_array()) {
        for (const auto& n : doc["nodes"]) {
            if (!n.contains("plan_set_hash") || !n["plan_set_hash"].is_string()) continue;
            const std::string hash = n["plan_set_hash"].get<std::string>();
            if (plans.contains(hash)) continue;
            const fs::path p = fs::path(dir) / "plans" / (hash + ".json");
            if (!fs::exists(p)) throw CorruptCheckpoint("plan store is missing " + hash);
            try {
                plans.emplace(hash, plan_set_from_json(json::parse(read_file(p.string()))));
            } catch (const std::exception& e) {
                throw CorruptCheckpoint("unreadable plan set " + hash + ": " + e.what());
            }
        }
    }
    SearchTree tree = SearchTree::from_json(doc, std::move(plans));
    return {std::move(tree), std::move(doc)};
}

}  // namespace autoct
