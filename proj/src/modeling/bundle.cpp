#include "autoct/modeling/bundle.hpp"

#include "autoct/common/rng.hpp"
#include "autoct/modeling/metrics.hpp"
#include "autoct/modeling/trees.hpp"

#include <algorithm>
#include <future>

namespace autoct {

const LogisticRegression* ModelBundle::logistic() const {
    return dynamic_cast<const LogisticRegression*>(models[0].get());
}

ModelBundle train_bundle(const Eigen::MatrixXd& x, const std::vector<int>& y, std::uint64_t seed) {
    ModelBundle bundle;
    const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    const auto cols = static_cast<std::size_t>(x.cols());
    if (y.empty() || pos == 0 || pos == y.size()) {
        const double p = y.empty() ? 0.5 : static_cast<double>(pos) / static_cast<double>(y.size());
        bundle.degenerate = true;
        for (std::size_t i = 0; i < 3; ++i) bundle.models[i] = std::make_shared<ConstantClassifier>(kModelNames[i], p, cols);
        return bundle;
    }
    // The families are independent, so they train concurrently.
    auto rf = std::async(std::launch::async, [&] {
        return std::make_shared<RandomForest>(RandomForest::fit(x, y, mix_seed(seed, "random_forest")));
    });
    auto gbt = std::async(std::launch::async,
                          [&] { return std::make_shared<GradientBoostedTrees>(GradientBoostedTrees::fit(x, y)); });
    bundle.models[0] = std::make_shared<LogisticRegression>(LogisticRegression::fit(x, y));
    bundle.models[1] = rf.get();
    bundle.models[2] = gbt.get();
    return bundle;
}

void select_model(ModelBundle& bundle, const Eigen::MatrixXd& x_valid, const std::vector<int>& y_valid,
                  Metric metric) {
    for (std::size_t i = 0; i < 3; ++i) {
        bundle.validation_scores[i] = compute_metric(metric, bundle.models[i]->predict_proba(x_valid), y_valid);
    }
    bundle.selected = 0;
    for (std::size_t i = 1; i < 3; ++i) {
        if (bundle.validation_scores[i] > bundle.validation_scores[bundle.selected]) bundle.selected = i;
    }
}

}  // namespace autoct
