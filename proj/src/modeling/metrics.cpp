#include "autoct/modeling/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace autoct {

namespace {

void check_sizes(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
}

std::vector<std::size_t> descending_order(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_sizes(scores, labels);
    const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double n_neg = static_cast<double>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("ROC-AUC needs both classes");
    // Mid-ranks (1-based, ascending) give the Mann-Whitney U statistic with ties counted as halves.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += mid;
        }
        i = j;
    }
    return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_sizes(scores, labels);
    const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    if (n_pos == 0) throw UndefinedMetric("PR-AUC needs at least one positive");
    const auto order = descending_order(scores);
    double tp = 0.0;
    double seen = 0.0;
    double prev_recall = 0.0;
    double ap = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) tp += 1.0;
            seen += 1.0;
            ++j;
        }
        const double recall = tp / n_pos;
        ap += (recall - prev_recall) * (tp / seen);
        prev_recall = recall;
        i = j;
    }
    return ap;
}

Confusion confusion_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_sizes(scores, labels);
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= kDecisionThreshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++c.tp;
        if (predicted && !actual) ++c.fp;
        if (!predicted && actual) ++c.fn;
        if (!predicted && !actual) ++c.tn;
    }
    return c;
}

double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    const Confusion c = confusion_at_threshold(scores, labels);
    if (c.tp == 0) return 0.0;
    const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return 2.0 * precision * recall / (precision + recall);
}

double compute_metric(Metric m, const std::vector<double>& scores, const std::vector<int>& labels) {
    switch (m) {
        case Metric::RocAuc: return roc_auc(scores, labels);
        case Metric::PrAuc: return pr_auc(scores, labels);
        case Metric::F1: return f1_at_threshold(scores, labels);
    }
    throw std::invalid_argument("unknown metric");
}

MetricReport metric_report(const std::vector<double>& scores, const std::vector<int>& labels) {
    MetricReport r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
        r.roc_auc = roc_auc(scores, labels);
    } catch (const UndefinedMetric&) {
        r.roc_auc = nan;
    }
    try {
        r.pr_auc = pr_auc(scores, labels);
    } catch (const UndefinedMetric&) {
        r.pr_auc = nan;
    }
    r.f1 = f1_at_threshold(scores, labels);
    r.confusion = confusion_at_threshold(scores, labels);
    return r;
}

}  // namespace autoct
