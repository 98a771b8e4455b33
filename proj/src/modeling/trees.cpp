#include "autoct/modeling/trees.hpp"

#include "autoct/common/rng.hpp"
#include "autoct/modeling/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace autoct {

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

/// Greedy exact-split tree growth on per-row gradient statistics. A node's
/// value is G / (H + lambda) and a split's gain is
/// G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda). With g = y and
/// h = 1 this is squared-error CART; with log-loss derivatives it is the
/// second-order boosting criterion.
class Grower {
public:
    Grower(const Eigen::MatrixXd& x, const std::vector<double>& g, const std::vector<double>& h, double lambda,
           double min_child_weight, int max_depth, int max_features, Rng* rng, std::vector<double>& importance)
        : x_(x), g_(g), h_(h), lambda_(lambda), min_child_weight_(min_child_weight), max_depth_(max_depth),
          max_features_(max_features), rng_(rng), importance_(importance) {}

    Tree grow(std::vector<int> rows) {
        Tree t;
        build(t, std::move(rows), 0);
        return t;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    double score(double g, double h) const { return g * g / (h + lambda_); }

    std::vector<int> candidate_features() {
        const int p = static_cast<int>(x_.cols());
        std::vector<int> out;
        if (max_features_ <= 0 || max_features_ >= p || rng_ == nullptr) {
            out.resize(static_cast<std::size_t>(p));
            std::iota(out.begin(), out.end(), 0);
            return out;
        }
        for (auto i : rng_->sample_without_replacement(static_cast<std::size_t>(p),
                                                       static_cast<std::size_t>(max_features_))) {
            out.push_back(static_cast<int>(i));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    Split best_split(const std::vector<int>& rows, double g_total, double h_total) {
        Split best;
        const double parent = score(g_total, h_total);
        std::vector<int> sorted = rows;
        for (int f : candidate_features()) {
            std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) { return x_(a, f) < x_(b, f); });
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                gl += g_[static_cast<std::size_t>(sorted[i])];
                hl += h_[static_cast<std::size_t>(sorted[i])];
                const double a = x_(sorted[i], f);
                const double b = x_(sorted[i + 1], f);
                if (a == b) continue;
                const double hr = h_total - hl;
                if (hl < min_child_weight_ || hr < min_child_weight_) continue;
                const double gain = score(gl, hl) + score(g_total - gl, hr) - parent;
                if (gain > best.gain + 1e-12) {
                    double thr = a + (b - a) / 2.0;
                    if (!(thr < b)) thr = a;
                    best = {f, thr, gain};
                }
            }
        }
        return best;
    }

    int build(Tree& t, std::vector<int> rows, int depth) {
        double g = 0.0;
        double h = 0.0;
        for (int r : rows) {
            g += g_[static_cast<std::size_t>(r)];
            h += h_[static_cast<std::size_t>(r)];
        }
        const int id = static_cast<int>(t.nodes.size());
        t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, h + lambda_ > 0.0 ? g / (h + lambda_) : 0.0});
        if (depth >= max_depth_ || rows.size() < 2) return id;
        const Split s = best_split(rows, g, h);
        if (s.feature < 0) return id;
        importance_[static_cast<std::size_t>(s.feature)] += s.gain;
        std::vector<int> left;
        std::vector<int> right;
        for (int r : rows) (x_(r, s.feature) <= s.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(t, std::move(left), depth + 1);
        const int r = build(t, std::move(right), depth + 1);
        auto& node = t.nodes[static_cast<std::size_t>(id)];
        node.feature = s.feature;
        node.threshold = s.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const Eigen::MatrixXd& x_;
    const std::vector<double>& g_;
    const std::vector<double>& h_;
    double lambda_;
    double min_child_weight_;
    int max_depth_;
    int max_features_;
    Rng* rng_;
    std::vector<double>& importance_;
};

void normalize_sum(std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    for (double& x : v) x /= total;
}

nlohmann::json tree_json(const Tree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

void check_inputs(const Eigen::MatrixXd& x, const std::vector<int>& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw std::invalid_argument("row/label mismatch");
    if (y.empty()) throw std::invalid_argument("cannot fit on zero rows");
}

}  // namespace

RandomForest RandomForest::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, std::uint64_t seed,
                               const ForestOptions& options) {
    check_inputs(x, y);
    const std::size_t n = y.size();
    const auto p = static_cast<std::size_t>(x.cols());
    int mtry = options.max_features;
    if (mtry <= 0) mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
    RandomForest forest;
    forest.importances_.assign(p, 0.0);
    for (int t = 0; t < options.n_trees; ++t) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<double> count(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) count[rng.uniform_index(n)] += 1.0;
        std::vector<double> g(n);
        std::vector<int> rows;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = count[i] * (y[i] == 1 ? 1.0 : 0.0);
            if (count[i] > 0) rows.push_back(static_cast<int>(i));
        }
        Grower grower(x, g, count, 0.0, 1.0, options.max_depth, mtry, &rng, forest.importances_);
        forest.trees_.push_back(grower.grow(std::move(rows)));
    }
    normalize_sum(forest.importances_);
    return forest;
}

std::vector<double> RandomForest::predict_proba(const Eigen::MatrixXd& x) const {
    std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (const auto& t : trees_) s += t.predict(x.row(r));
        out[static_cast<std::size_t>(r)] = trees_.empty() ? 0.5 : std::clamp(s / static_cast<double>(trees_.size()), 0.0, 1.0);
    }
    return out;
}

nlohmann::json RandomForest::parameters() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(tree_json(t));
    return {{"trees", std::move(trees)}, {"importances", importances_}};
}

GradientBoostedTrees GradientBoostedTrees::fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                               const BoostingOptions& options) {
    check_inputs(x, y);
    const std::size_t n = y.size();
    const auto p = static_cast<std::size_t>(x.cols());
    GradientBoostedTrees model;
    model.learning_rate_ = options.learning_rate;
    model.importances_.assign(p, 0.0);
    const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double prior = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    model.base_margin_ = std::log(prior / (1.0 - prior));
    std::vector<double> margin(n, model.base_margin_);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> g(n);
    std::vector<double> h(n);
    for (int round = 0; round < options.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = sigmoid(margin[i]);
            g[i] = (y[i] == 1 ? 1.0 : 0.0) - prob;
            h[i] = prob * (1.0 - prob);
        }
        Grower grower(x, g, h, options.lambda, options.min_child_weight, options.max_depth, 0, nullptr,
                      model.importances_);
        Tree t = grower.grow(all);
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += options.learning_rate * t.predict(x.row(static_cast<Eigen::Index>(i)));
        }
        model.trees_.push_back(std::move(t));
    }
    normalize_sum(model.importances_);
    return model;
}

std::vector<double> GradientBoostedTrees::predict_proba(const Eigen::MatrixXd& x) const {
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double m = base_margin_;
        for (const auto& t : trees_) m += learning_rate_ * t.predict(x.row(r));
        out[static_cast<std::size_t>(r)] = sigmoid(m);
    }
    return out;
}

nlohmann::json GradientBoostedTrees::parameters() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(tree_json(t));
    return {{"base_margin", base_margin_},
            {"learning_rate", learning_rate_},
            {"trees", std::move(trees)},
            {"importances", importances_}};
}

}  // namespace autoct
