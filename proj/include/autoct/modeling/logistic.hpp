#pragma once

#include "autoct/modeling/classifier.hpp"

namespace autoct {

struct LogisticOptions {
    /// Objective: sum of log-losses + (lambda / 2) * ||w||^2, intercept unpenalized.
    double lambda = 1.0;
    double gradient_tolerance = 1e-6;
    int max_iterations = 10000;
};

class LogisticRegression final : public Classifier {
public:
    /// Newton's method with backtracking line search. Labels are 0/1.
    static LogisticRegression fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                  const LogisticOptions& options = {});
    LogisticRegression(Eigen::VectorXd weights, double intercept) : w_(std::move(weights)), b_(intercept) {}

    [[nodiscard]] std::string name() const override { return "logistic_regression"; }
    [[nodiscard]] std::vector<double> predict_proba(const Eigen::MatrixXd& x) const override;
    [[nodiscard]] std::vector<double> importances() const override;
    [[nodiscard]] nlohmann::json parameters() const override;

    [[nodiscard]] Eigen::VectorXd logits(const Eigen::MatrixXd& x) const;
    [[nodiscard]] const Eigen::VectorXd& weights() const { return w_; }
    [[nodiscard]] double intercept() const { return b_; }
    [[nodiscard]] int iterations() const { return iterations_; }
    [[nodiscard]] double gradient_norm() const { return gradient_norm_; }

private:
    Eigen::VectorXd w_;
    double b_;
    int iterations_ = 0;
    double gradient_norm_ = 0.0;
};

double sigmoid(double z);

}  // namespace autoct
