#include "autoct/modeling/logistic.hpp"

#include <cmath>
#include <stdexcept>

namespace autoct {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

/// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Parameters are stacked as [w; b].
double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta, double lambda) {
    const Eigen::Index p = x.cols();
    const Eigen::VectorXd z = x * theta.head(p) + Eigen::VectorXd::Constant(x.rows(), theta(p));
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y(i) * z(i);
    return loss + 0.5 * lambda * theta.head(p).squaredNorm();
}

}  // namespace

LogisticRegression LogisticRegression::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                           const LogisticOptions& options) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw std::invalid_argument("row/label mismatch");
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;

    Eigen::MatrixXd xa(n, p + 1);
    xa << x, Eigen::VectorXd::Ones(n);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, options.lambda);
    penalty(p) = 0.0;

    double f = objective(x, y, theta, options.lambda);
    int iter = 0;
    double gnorm = 0.0;
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::VectorXd z = xa * theta;
        Eigen::VectorXd prob(n);
        Eigen::VectorXd weight(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            prob(i) = sigmoid(z(i));
            weight(i) = prob(i) * (1.0 - prob(i));
        }
        const Eigen::VectorXd grad = xa.transpose() * (prob - y) + penalty.cwiseProduct(theta);
        gnorm = grad.norm();
        if (gnorm < options.gradient_tolerance) break;
        Eigen::MatrixXd hess = xa.transpose() * weight.asDiagonal() * xa;
        hess.diagonal() += penalty;
        // Keeps the intercept direction invertible when predictions saturate.
        hess(p, p) += 1e-12;
        Eigen::VectorXd step = hess.ldlt().solve(grad);
        if (!step.allFinite()) step = grad;
        double t = 1.0;
        const double slope = grad.dot(step);
        Eigen::VectorXd candidate = theta - step;
        double fc = objective(x, y, candidate, options.lambda);
        while (fc > f - 1e-4 * t * slope && t > 1e-12) {
            t *= 0.5;
            candidate = theta - t * step;
            fc = objective(x, y, candidate, options.lambda);
        }
        if (fc > f) break;  // no descent possible at machine precision
        theta = std::move(candidate);
        f = fc;
    }
    LogisticRegression model(theta.head(p), theta(p));
    model.iterations_ = iter;
    model.gradient_norm_ = gnorm;
    return model;
}

Eigen::VectorXd LogisticRegression::logits(const Eigen::MatrixXd& x) const {
    return x * w_ + Eigen::VectorXd::Constant(x.rows(), b_);
}

std::vector<double> LogisticRegression::predict_proba(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd z = logits(x);
    std::vector<double> out(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) out[static_cast<std::size_t>(i)] = sigmoid(z(i));
    return out;
}

std::vector<double> LogisticRegression::importances() const {
    std::vector<double> out(static_cast<std::size_t>(w_.size()));
    for (Eigen::Index i = 0; i < w_.size(); ++i) out[static_cast<std::size_t>(i)] = std::abs(w_(i));
    return out;
}

nlohmann::json LogisticRegression::parameters() const {
    return {{"weights", std::vector<double>(w_.data(), w_.data() + w_.size())},
            {"intercept", b_},
            {"iterations", iterations_},
            {"gradient_norm", gradient_norm_}};
}

}  // namespace autoct
