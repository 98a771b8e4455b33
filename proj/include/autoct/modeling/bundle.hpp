#pragma once

#include "autoct/domain/types.hpp"
#include "autoct/modeling/classifier.hpp"
#include "autoct/modeling/logistic.hpp"

#include <array>
#include <memory>
#include <optional>

namespace autoct {

/// The three model families, in tie-breaking order.
inline constexpr std::array<const char*, 3> kModelNames = {"logistic_regression", "random_forest",
                                                            "gradient_boosting"};

struct ModelBundle {
    std::array<std::shared_ptr<const Classifier>, 3> models;
    /// Set when training saw a single class; every model is then constant.
    bool degenerate = false;
    std::array<double, 3> validation_scores{};
    std::size_t selected = 0;

    [[nodiscard]] const Classifier& best() const { return *models[selected]; }
    /// The logistic model, if training was not degenerate.
    [[nodiscard]] const LogisticRegression* logistic() const;
};

/// Fits all three families; deterministic in (x, y, seed).
ModelBundle train_bundle(const Eigen::MatrixXd& x, const std::vector<int>& y, std::uint64_t seed);

/// Scores every model on the validation rows and selects the argmax, with ties
/// going to the earlier family in kModelNames.
void select_model(ModelBundle& bundle, const Eigen::MatrixXd& x_valid, const std::vector<int>& y_valid,
                  Metric metric);

}  // namespace autoct
