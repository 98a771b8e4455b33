#pragma once

#include "autoct/domain/errors.hpp"
#include "autoct/domain/types.hpp"

#include <cstddef>
#include <vector>

namespace autoct {

/// The metric is not defined for the given labels (e.g. a single class).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

inline constexpr double kDecisionThreshold = 0.5;

/// Mann-Whitney estimate: P(s+ > s-) + P(s+ = s-)/2. Needs both classes.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);
/// Average precision with tied scores treated as one threshold. Needs a positive.
double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels);
/// F1 of predictions score >= 0.5; 0 when precision or recall is undefined or zero.
double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};
Confusion confusion_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

double compute_metric(Metric m, const std::vector<double>& scores, const std::vector<int>& labels);

struct MetricReport {
    double roc_auc = 0.0;
    double pr_auc = 0.0;
    double f1 = 0.0;
    Confusion confusion;
};

/// All three metrics; undefined ones are reported as NaN.
MetricReport metric_report(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace autoct
