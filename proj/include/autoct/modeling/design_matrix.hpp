#pragma once

#include "autoct/domain/plan.hpp"
#include "autoct/domain/values.hpp"

#include <Eigen/Dense>

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace autoct {

/// Encoded feature table. Rows are trials in ascending nct_id order; columns
/// follow plan order, then sub-feature order, then category order.
struct DesignMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> columns;
    /// Feature name owning each column, for aggregating attributions.
    std::vector<std::string> column_feature;
    Eigen::MatrixXd values;

    [[nodiscard]] std::size_t rows() const { return row_ids.size(); }
    [[nodiscard]] std::size_t cols() const { return columns.size(); }
};

/// Column name prefix for a sub-feature: the feature name alone when the
/// sub-feature is "value" or repeats the feature name, "feature.sub" otherwise.
std::string column_base(const std::string& feature, const std::string& sub);

/// Column layout implied by a plan set, independent of any data.
std::vector<std::string> design_columns(const PlanSet& plans);

/// Numeric and boolean values become one column, categorical values a one-hot
/// block and multicategorical values a multi-hot block. Every sub-feature also
/// gets a `__missing` indicator; missing cells are imputed with 0.
DesignMatrix encode(const PlanSet& plans, std::vector<FeatureValueSet> value_sets);

/// Rows of `m` whose ids are in `ids`, kept in matrix order.
DesignMatrix select_rows(const DesignMatrix& m, const std::vector<std::string>& ids);

/// CSV with an nct_id column followed by the encoded columns; values are
/// written with round-trip precision.
void write_design_csv(std::ostream& out, const DesignMatrix& m);
/// Reads the format written by write_design_csv. Feature ownership is taken
/// from `plans`, which must produce the same column layout.
DesignMatrix read_design_csv(std::istream& in, const PlanSet& plans);

/// Sums per-column quantities into per-feature totals.
std::map<std::string, double> aggregate_by_feature(const DesignMatrix& m, const std::vector<double>& per_column);

}  // namespace autoct
