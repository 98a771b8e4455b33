#include "autoct/modeling/explain.hpp"

#include "autoct/common/rng.hpp"
#include "autoct/modeling/metrics.hpp"

#include <numeric>
#include <stdexcept>

namespace autoct {

std::vector<double> linear_shap(const Eigen::VectorXd& weights, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                const Eigen::Ref<const Eigen::RowVectorXd>& background) {
    if (weights.size() != x.size() || x.size() != background.size()) {
        throw std::invalid_argument("linear_shap: dimension mismatch");
    }
    std::vector<double> phi(static_cast<std::size_t>(weights.size()));
    for (Eigen::Index j = 0; j < weights.size(); ++j) {
        phi[static_cast<std::size_t>(j)] = weights(j) * (x(j) - background(j));
    }
    return phi;
}

std::vector<double> linear_shap(const LogisticRegression& model, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                const Eigen::Ref<const Eigen::RowVectorXd>& background) {
    return linear_shap(model.weights(), x, background);
}

Eigen::RowVectorXd column_means(const Eigen::MatrixXd& x) {
    if (x.rows() == 0) return Eigen::RowVectorXd::Zero(x.cols());
    return x.colwise().mean();
}

std::vector<double> permutation_importance(const Classifier& model, const Eigen::MatrixXd& x,
                                           const std::vector<int>& y, Metric metric, std::uint64_t seed,
                                           int repeats) {
    if (repeats < 1) throw std::invalid_argument("repeats must be positive");
    const double base = compute_metric(metric, model.predict_proba(x), y);
    std::vector<double> out(static_cast<std::size_t>(x.cols()), 0.0);
    Eigen::MatrixXd work = x;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        double drop = 0.0;
        for (int r = 0; r < repeats; ++r) {
            std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            rng.shuffle(perm);
            for (Eigen::Index i = 0; i < x.rows(); ++i) work(i, c) = x(perm[static_cast<std::size_t>(i)], c);
            drop += base - compute_metric(metric, model.predict_proba(work), y);
        }
        work.col(c) = x.col(c);
        out[static_cast<std::size_t>(c)] = drop / repeats;
    }
    return out;
}

}  // namespace autoct
