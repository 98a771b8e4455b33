#include <doctest.h>

#include "../support/fixtures.hpp"

#include "autoct/common/rng.hpp"
#include "autoct/modeling/bundle.hpp"
#include "autoct/modeling/design_matrix.hpp"
#include "autoct/modeling/explain.hpp"
#include "autoct/modeling/metrics.hpp"
#include "autoct/modeling/trees.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace autoct;
using nlohmann::json;

namespace {

// ---- Independent oracles -------------------------------------------------

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            pairs += 1.0;
            if (s[i] > s[j]) wins += 1.0;
            if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

/// Average precision by sweeping every distinct score as a ">= t" threshold.
double threshold_sweep_ap(const std::vector<double>& s, const std::vector<int>& y) {
    std::set<double, std::greater<>> thresholds(s.begin(), s.end());
    double positives = 0.0;
    for (int v : y) positives += v;
    double prev_recall = 0.0;
    double ap = 0.0;
    for (double t : thresholds) {
        double tp = 0.0;
        double predicted = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] >= t) {
                predicted += 1.0;
                tp += y[i];
            }
        }
        const double recall = tp / positives;
        ap += (recall - prev_recall) * (tp / predicted);
        prev_recall = recall;
    }
    return ap;
}

double counted_f1(const std::vector<double>& s, const std::vector<int>& y) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool pred = s[i] >= 0.5;
        tp += pred && y[i] == 1;
        fp += pred && y[i] == 0;
        fn += !pred && y[i] == 1;
    }
    if (tp == 0) return 0.0;
    return 2 * tp / (2 * tp + fp + fn);
}

double regularized_loss(const std::vector<double>& x, const std::vector<int>& y, double w, double b) {
    double loss = 0.5 * w * w;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = w * x[i] + b;
        loss += std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - y[i] * z;
    }
    return loss;
}

// ---- Helpers -------------------------------------------------------------

Eigen::MatrixXd column(const std::vector<double>& v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
    return m;
}

FeaturePlan categorical_plan(const std::string& name, std::vector<std::string> cats, bool multi = false) {
    FeaturePlan p;
    p.feature_name = name;
    p.feature_type = {{"value", multi ? FeatureType::Multicategorical : FeatureType::Categorical}};
    p.possible_values = {{"value", std::move(cats)}};
    return p;
}

FeatureValueSet row(const std::string& id, const std::string& feature, std::optional<FeatureValue> v,
                    const std::string& sub = "value") {
    FeatureValueSet s;
    s.nct_id = id;
    s.values[feature][sub] = std::move(v);
    return s;
}

std::vector<double> row_vector(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
    return out;
}

}  // namespace

TEST_CASE("encode examples") {
    PlanSet plans = {{"arm", categorical_plan("arm", {"a", "b", "c"})}};
    auto m = encode(plans, {row("NCT2", "arm", FeatureValue{std::string("b")}), row("NCT1", "arm", std::nullopt)});
    CHECK(m.columns == std::vector<std::string>{"arm=a", "arm=b", "arm=c", "arm__missing"});
    CHECK(m.row_ids == std::vector<std::string>{"NCT1", "NCT2"});
    CHECK(row_vector(m.values, 1) == std::vector<double>{0, 1, 0, 0});
    CHECK(row_vector(m.values, 0) == std::vector<double>{0, 0, 0, 1});

    const PlanSet worked = plan_set_from_json(testing::fixture_json("worked/planner_response.json"));
    PlanSet design = {{"trial_design_elements", worked.at("trial_design_elements")}};
    auto md = encode(design, {row("NCT1", "trial_design_elements",
                                  FeatureValue{std::vector<std::string>{"randomized", "double-blind"}},
                                  "trial_design_elements")});
    REQUIRE(md.cols() == 7);
    CHECK(md.values.row(0).head(6).sum() == 2.0);
    CHECK(md.values(0, 6) == 0.0);
    CHECK(md.columns[0] == "trial_design_elements=randomized");
}

TEST_CASE("encode numeric, boolean and multi-sub-feature plans") {
    FeaturePlan age;
    age.feature_name = "age_range";
    age.feature_type = {{"min_age", FeatureType::Integer}, {"max_age", FeatureType::Integer}};
    FeaturePlan flag;
    flag.feature_name = "flag";
    flag.feature_type = {{"value", FeatureType::Boolean}};
    PlanSet plans = {{"age_range", age}, {"flag", flag}};
    FeatureValueSet a;
    a.nct_id = "NCT1";
    a.values["age_range"] = {{"min_age", FeatureValue{std::int64_t{18}}}, {"max_age", std::nullopt}};
    a.values["flag"] = {{"value", FeatureValue{true}}};
    FeatureValueSet b;
    b.nct_id = "NCT2";
    auto m = encode(plans, {a, b});
    CHECK(m.columns == std::vector<std::string>{"age_range.max_age", "age_range.max_age__missing",
                                                "age_range.min_age", "age_range.min_age__missing", "flag",
                                                "flag__missing"});
    CHECK(row_vector(m.values, 0) == std::vector<double>{0, 1, 18, 0, 1, 0});
    CHECK(row_vector(m.values, 1) == std::vector<double>{0, 1, 0, 1, 0, 1});
    CHECK(m.column_feature[2] == "age_range");
    CHECK(design_columns(plans) == m.columns);
    CHECK_FALSE(m.values.hasNaN());

    std::stringstream csv;
    write_design_csv(csv, m);
    auto back = read_design_csv(csv, plans);
    CHECK(back.row_ids == m.row_ids);
    CHECK(back.values == m.values);

    auto sub = select_rows(m, {"NCT2"});
    CHECK(sub.rows() == 1);
    CHECK(sub.row_ids[0] == "NCT2");
}

TEST_CASE("metric examples") {
    CHECK(roc_auc({.9, .8, .2, .1}, {1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc({.1, .4, .35, .8}, {0, 0, 1, 1}) == 0.75);
    CHECK(roc_auc({.5, .5}, {0, 1}) == 0.5);
    CHECK_THROWS_AS(roc_auc({.1, .2}, {1, 1}), UndefinedMetric);

    CHECK(pr_auc({.9, .8, .2}, {1, 1, 0}) == 1.0);
    CHECK(pr_auc({.2, .9}, {1, 0}) == 0.5);
    CHECK(pr_auc({.3, .3, .3, .3}, {1, 0, 0, 0}) == 0.25);
    CHECK_THROWS_AS(pr_auc({.1}, {0}), UndefinedMetric);

    // TP=2, FP=1, FN=1.
    CHECK(f1_at_threshold({.9, .8, .7, .1, .2}, {1, 1, 0, 1, 0}) == doctest::Approx(2.0 / 3.0));
    CHECK(f1_at_threshold({.9, .1}, {1, 0}) == 1.0);
    CHECK(f1_at_threshold({.1, .2}, {1, 0}) == 0.0);
}

TEST_CASE("metrics match brute-force oracles on random instances with ties") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(19);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.uniform_index(6)) / 5.0;  // coarse grid forces ties
            y[i] = static_cast<int>(rng.uniform_index(2));
        }
        y[0] = 1;
        y[1] = 0;
        CHECK(roc_auc(s, y) == pairwise_auc(s, y));
        CHECK(pr_auc(s, y) == doctest::Approx(threshold_sweep_ap(s, y)).epsilon(1e-15));
        CHECK(f1_at_threshold(s, y) == doctest::Approx(counted_f1(s, y)).epsilon(1e-15));
        for (double v : {roc_auc(s, y), pr_auc(s, y), f1_at_threshold(s, y)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        std::vector<double> transformed(n);
        for (std::size_t i = 0; i < n; ++i) transformed[i] = std::exp(3.0 * s[i]) - 7.0;
        CHECK(roc_auc(transformed, y) == roc_auc(s, y));
    }
}

TEST_CASE("logistic regression matches a grid-search minimizer") {
    const std::vector<double> xs = {0.5, 2.0};
    const std::vector<int> ys = {0, 1};
    auto model = LogisticRegression::fit(column(xs), ys);
    CHECK(model.gradient_norm() < 1e-6);

    double best_w = 0, best_b = 0, best = 1e300;
    auto scan = [&](double w0, double w1, double b0, double b1, double step) {
        for (double w = w0; w <= w1 + 1e-12; w += step) {
            for (double b = b0; b <= b1 + 1e-12; b += step) {
                const double l = regularized_loss(xs, ys, w, b);
                if (l < best) {
                    best = l;
                    best_w = w;
                    best_b = b;
                }
            }
        }
    };
    scan(-10, 10, -10, 10, 0.01);
    const double cw = best_w, cb = best_b;
    scan(cw - 0.02, cw + 0.02, cb - 0.02, cb + 0.02, 1e-4);
    CHECK(std::abs(model.weights()(0) - best_w) < 1e-3);
    CHECK(std::abs(model.intercept() - best_b) < 1e-3);
}

TEST_CASE("training examples") {
    const std::vector<int> y = {0, 1, 0, 1, 1, 0, 1, 0};
    Eigen::MatrixXd x(8, 1);
    for (int i = 0; i < 8; ++i) x(i, 0) = y[static_cast<std::size_t>(i)];
    auto bundle = train_bundle(x, y, 7);
    for (const auto& m : bundle.models) CHECK(roc_auc(m->predict_proba(x), y) == 1.0);

    // Features identical across classes: nothing to learn.
    Eigen::MatrixXd same = Eigen::MatrixXd::Ones(8, 1);
    auto flat = LogisticRegression::fit(same, y);
    CHECK(std::abs(flat.weights()(0)) < 1e-6);
    CHECK(roc_auc(flat.predict_proba(same), y) == 0.5);

    auto degenerate = train_bundle(x, std::vector<int>(8, 1), 7);
    CHECK(degenerate.degenerate);
    for (double p : degenerate.best().predict_proba(x)) CHECK(p == 1.0);
}

TEST_CASE("training is deterministic and probabilities are in range") {
    Rng rng(4);
    Eigen::MatrixXd x(60, 5);
    std::vector<int> y(60);
    for (int i = 0; i < 60; ++i) {
        for (int j = 0; j < 5; ++j) x(i, j) = static_cast<double>(rng.uniform_index(5));
        y[static_cast<std::size_t>(i)] = (x(i, 0) + x(i, 1) + static_cast<double>(rng.uniform_index(3))) > 5 ? 1 : 0;
    }
    auto a = train_bundle(x, y, 11);
    auto b = train_bundle(x, y, 11);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.models[i]->parameters() == b.models[i]->parameters());
        for (double p : a.models[i]->predict_proba(x)) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
    auto c = train_bundle(x, y, 12);
    CHECK(a.models[1]->parameters() != c.models[1]->parameters());
}

TEST_CASE("model selection is an argmax with fixed tie order") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(40, 3);
        std::vector<int> y(40);
        for (int i = 0; i < 40; ++i) {
            for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform_unit();
            y[static_cast<std::size_t>(i)] = x(i, 0) + 0.5 * rng.uniform_unit() > 0.75 ? 1 : 0;
        }
        y[0] = 1;
        y[1] = 0;
        auto bundle = train_bundle(x.topRows(30), std::vector<int>(y.begin(), y.begin() + 30), 3);
        select_model(bundle, x.bottomRows(10), std::vector<int>(y.begin() + 30, y.end()), Metric::RocAuc);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(bundle.validation_scores[bundle.selected] >= bundle.validation_scores[i]);
            if (i < bundle.selected) CHECK(bundle.validation_scores[i] < bundle.validation_scores[bundle.selected]);
        }
    }
    // All-equal validation scores select logistic regression.
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 0, 1;
    auto bundle = train_bundle(x, {0, 1, 0, 1}, 1);
    select_model(bundle, x, {0, 1, 0, 1}, Metric::RocAuc);
    CHECK(bundle.selected == 0);
}

TEST_CASE("importances") {
    Rng rng(6);
    Eigen::MatrixXd x(50, 2);
    std::vector<int> y(50);
    for (int i = 0; i < 50; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2;
        x(i, 0) = 3.0;                                         // constant
        x(i, 1) = (i % 2) + 0.3 * rng.uniform_unit();           // informative
    }
    auto rf = RandomForest::fit(x, y, 1);
    auto gbt = GradientBoostedTrees::fit(x, y);
    CHECK(rf.importances()[0] == 0.0);
    CHECK(gbt.importances()[0] == 0.0);
    CHECK(rf.importances()[1] == doctest::Approx(1.0));

    LogisticRegression fixed((Eigen::VectorXd(1) << -2.0).finished(), 0.0);
    CHECK(fixed.importances()[0] == 2.0);

    Eigen::MatrixXd dup(50, 2);
    dup.col(0) = x.col(1);
    dup.col(1) = x.col(1);
    auto lr = LogisticRegression::fit(dup, y);
    CHECK(lr.importances()[0] == doctest::Approx(lr.importances()[1]).epsilon(1e-9));
}

TEST_CASE("linear SHAP equals brute-force Shapley values") {
    Eigen::VectorXd w(1);
    w << 2.0;
    Eigen::RowVectorXd x1(1), mu1(1);
    x1 << 1.0;
    mu1 << 0.0;
    CHECK(linear_shap(w, x1, mu1)[0] == 2.0);
    CHECK(linear_shap(w, mu1, mu1)[0] == 0.0);

    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 3;
        Eigen::VectorXd wt(p);
        Eigen::RowVectorXd x(p), mu(p);
        for (int j = 0; j < p; ++j) {
            wt(j) = 4.0 * rng.uniform_unit() - 2.0;
            x(j) = 10.0 * rng.uniform_unit() - 5.0;
            mu(j) = 10.0 * rng.uniform_unit() - 5.0;
        }
        const double b = rng.uniform_unit();
        LogisticRegression model(wt, b);
        // v(S): logit with features in S at x and the rest at the background.
        auto value = [&](unsigned mask) {
            double z = b;
            for (int j = 0; j < p; ++j) z += wt(j) * (((mask >> j) & 1U) ? x(j) : mu(j));
            return z;
        };
        const double fact[] = {1, 1, 2, 6};
        auto phi = linear_shap(model, x, mu);
        double total = 0.0;
        for (int j = 0; j < p; ++j) {
            double shapley = 0.0;
            for (unsigned mask = 0; mask < (1U << p); ++mask) {
                if ((mask >> j) & 1U) continue;
                const int s = __builtin_popcount(mask);
                shapley += fact[s] * fact[p - s - 1] / fact[p] * (value(mask | (1U << j)) - value(mask));
            }
            CHECK(std::abs(phi[static_cast<std::size_t>(j)] - shapley) < 1e-9);
            total += phi[static_cast<std::size_t>(j)];
        }
        Eigen::MatrixXd xm = x, mm = mu;
        CHECK(std::abs(total - (model.logits(xm)(0) - model.logits(mm)(0))) < 1e-9);
    }
}

TEST_CASE("permutation importance") {
    Rng rng(12);
    const int n = 200;
    Eigen::MatrixXd x(n, 2);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_index(2));
        x(i, 0) = y[static_cast<std::size_t>(i)];
        x(i, 1) = rng.uniform_unit();
    }
    // A model that reads only the label copy, so the noise column cannot matter.
    LogisticRegression model((Eigen::VectorXd(2) << 4.0, 0.0).finished(), -2.0);
    auto imp = permutation_importance(model, x, y, Metric::RocAuc, 5);
    CHECK(imp[0] > 0.0);
    CHECK(std::abs(imp[1]) <= 0.05);
    CHECK(permutation_importance(model, x, y, Metric::RocAuc, 5) == imp);

    auto fitted = LogisticRegression::fit(x, y);
    auto imp2 = permutation_importance(fitted, x, y, Metric::RocAuc, 9);
    CHECK(imp2[0] > 0.0);
    CHECK(std::abs(imp2[1]) <= 0.05);
}
