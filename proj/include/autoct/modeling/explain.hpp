#pragma once

#include "autoct/domain/types.hpp"
#include "autoct/modeling/classifier.hpp"
#include "autoct/modeling/logistic.hpp"

#include <cstdint>
#include <vector>

namespace autoct {

/// Exact Shapley values of a linear logit against a background mean:
/// phi_j = w_j * (x_j - mu_j).
std::vector<double> linear_shap(const Eigen::VectorXd& weights, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                const Eigen::Ref<const Eigen::RowVectorXd>& background);
std::vector<double> linear_shap(const LogisticRegression& model, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                const Eigen::Ref<const Eigen::RowVectorXd>& background);

Eigen::RowVectorXd column_means(const Eigen::MatrixXd& x);

/// Mean drop in `metric` when one column is shuffled, over `repeats` seeded
/// permutations per column.
std::vector<double> permutation_importance(const Classifier& model, const Eigen::MatrixXd& x,
                                           const std::vector<int>& y, Metric metric, std::uint64_t seed,
                                           int repeats = 5);

}  // namespace autoct
