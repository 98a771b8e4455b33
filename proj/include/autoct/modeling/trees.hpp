#pragma once

#include "autoct/modeling/classifier.hpp"

#include <cstdint>
#include <vector>

namespace autoct {

/// Binary regression tree over dense rows; x <= threshold goes left.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    [[nodiscard]] double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct ForestOptions {
    int n_trees = 100;
    int max_depth = 6;
    /// Features tried per split; 0 means floor(sqrt(p)), at least 1.
    int max_features = 0;
};

/// Bagged trees on bootstrap samples with per-split feature subsampling.
/// Leaves hold the positive fraction, so predictions are average votes.
class RandomForest final : public Classifier {
public:
    static RandomForest fit(const Eigen::MatrixXd& x, const std::vector<int>& y, std::uint64_t seed,
                            const ForestOptions& options = {});

    [[nodiscard]] std::string name() const override { return "random_forest"; }
    [[nodiscard]] std::vector<double> predict_proba(const Eigen::MatrixXd& x) const override;
    [[nodiscard]] std::vector<double> importances() const override { return importances_; }
    [[nodiscard]] nlohmann::json parameters() const override;

private:
    std::vector<Tree> trees_;
    std::vector<double> importances_;
};

struct BoostingOptions {
    int n_rounds = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    double lambda = 1.0;
    double min_child_weight = 1e-3;
};

/// Second-order gradient boosting of log-loss with L2-regularized leaf weights.
class GradientBoostedTrees final : public Classifier {
public:
    static GradientBoostedTrees fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                    const BoostingOptions& options = {});

    [[nodiscard]] std::string name() const override { return "gradient_boosting"; }
    [[nodiscard]] std::vector<double> predict_proba(const Eigen::MatrixXd& x) const override;
    [[nodiscard]] std::vector<double> importances() const override { return importances_; }
    [[nodiscard]] nlohmann::json parameters() const override;

private:
    double base_margin_ = 0.0;
    double learning_rate_ = 0.1;
    std::vector<Tree> trees_;
    std::vector<double> importances_;
};

}  // namespace autoct
