#pragma once

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace autoct {

/// Trained binary classifier over encoded rows.
class Classifier {
public:
    virtual ~Classifier() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    /// P(label = 1) per row, each in [0, 1].
    [[nodiscard]] virtual std::vector<double> predict_proba(const Eigen::MatrixXd& x) const = 0;
    /// Per-column importance: |weight| for linear models, normalized total
    /// gain for tree ensembles.
    [[nodiscard]] virtual std::vector<double> importances() const = 0;
    /// Fitted parameters, for determinism checks and reports.
    [[nodiscard]] virtual nlohmann::json parameters() const = 0;
};

/// Predicts the same probability everywhere; used when labels are degenerate.
class ConstantClassifier final : public Classifier {
public:
    ConstantClassifier(std::string name, double p, std::size_t n_columns)
        : name_(std::move(name)), p_(p), n_columns_(n_columns) {}
    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] std::vector<double> predict_proba(const Eigen::MatrixXd& x) const override {
        return std::vector<double>(static_cast<std::size_t>(x.rows()), p_);
    }
    [[nodiscard]] std::vector<double> importances() const override { return std::vector<double>(n_columns_, 0.0); }
    [[nodiscard]] nlohmann::json parameters() const override { return {{"constant", p_}}; }

private:
    std::string name_;
    double p_;
    std::size_t n_columns_;
};

}  // namespace autoct
