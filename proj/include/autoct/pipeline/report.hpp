#pragma once

#include "autoct/modeling/metrics.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace autoct {

struct ReportOptions {
    /// Test trials to draw SHAP bar charts for.
    std::vector<std::string> trials;
};

struct RenderedReport {
    nlohmann::json document;
    std::string text;
    /// (nct_id, svg) for each requested trial.
    std::vector<std::pair<std::string, std::string>> charts;
};

/// Rebuilds the report from the run directory's artifacts alone: retrains
/// the best node from its feature CSV and checks the score against the tree.
/// Throws CorruptRun.
RenderedReport build_report(const std::string& run_dir, const ReportOptions& options = {});

/// Writes report.json, report.md and shap/<nct_id>.svg.
void write_report(const std::string& run_dir, const RenderedReport& report);

/// Horizontal bar chart of signed per-feature contributions.
std::string render_shap_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& contributions);

}  // namespace autoct
