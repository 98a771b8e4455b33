#include "autoct/pipeline/report.hpp"

#include "autoct/common/text.hpp"
#include "autoct/domain/dataset.hpp"
#include "autoct/modeling/explain.hpp"
#include "autoct/pipeline/config.hpp"
#include "autoct/pipeline/context.hpp"
#include "autoct/pipeline/run_dir.hpp"
#include "autoct/search/tree.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace autoct {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Tolerance for the recomputed validation score of the best node.
constexpr double kScoreTolerance = 1e-12;

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json metrics_json(const MetricReport& m) {
    return {{"roc_auc", number_or_null(m.roc_auc)},
            {"pr_auc", number_or_null(m.pr_auc)},
            {"f1", number_or_null(m.f1)},
            {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

std::string fmt_metric(const json& v) { return v.is_null() ? "n/a" : fmt::format("{:.4f}", v.get<double>()); }

DesignMatrix read_matrix(const std::string& path, const PlanSet& plans) {
    std::ifstream in(path);
    if (!in) throw CorruptRun("missing feature matrix " + fs::path(path).filename().string());
    try {
        return read_design_csv(in, plans);
    } catch (const std::exception& e) {
        throw CorruptRun("feature matrix " + fs::path(path).filename().string() + " is unreadable: " + e.what());
    }
}

std::vector<int> labels_of(const DesignMatrix& m, const std::vector<TrialRecord>& trials) {
    std::map<std::string, int> label;
    for (const auto& t : trials) label[t.nct_id] = t.label;
    std::vector<int> y;
    for (const auto& id : m.row_ids) {
        auto it = label.find(id);
        if (it == label.end()) throw CorruptRun("feature matrix row " + id + " is not in the sampled trials");
        y.push_back(it->second);
    }
    return y;
}

std::vector<std::string> ids_of(const std::vector<TrialRecord>& trials) {
    std::vector<std::string> ids;
    for (const auto& t : trials) ids.push_back(t.nct_id);
    return ids;
}

std::vector<std::pair<std::string, double>> sorted_by_magnitude(const std::map<std::string, double>& m) {
    std::vector<std::pair<std::string, double>> out(m.begin(), m.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
    return out;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_shap_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& contributions) {
    const int row_h = 22;
    const int label_w = 260;
    const int bar_w = 360;
    const int top = 40;
    const int height = top + row_h * static_cast<int>(contributions.size()) + 20;
    const int width = label_w + bar_w + 90;
    double scale = 0.0;
    for (const auto& [name, v] : contributions) scale = std::max(scale, std::abs(v));
    const double half = bar_w / 2.0;
    const double axis = label_w + half;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n"
        "<line x1=\"{:.1f}\" y1=\"{}\" x2=\"{:.1f}\" y2=\"{}\" stroke=\"#444\"/>\n",
        width, height, escape_xml(title), axis, top - 6, axis, height - 14);
    int y = top;
    for (const auto& [name, v] : contributions) {
        const double len = scale > 0.0 ? std::abs(v) / scale * half : 0.0;
        const double x = v >= 0.0 ? axis : axis - len;
        svg += fmt::format(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n"
            "<rect x=\"{:.1f}\" y=\"{}\" width=\"{:.1f}\" height=\"{}\" fill=\"{}\"/>\n"
            "<text x=\"{:.1f}\" y=\"{}\">{:+.4f}</text>\n",
            label_w - 8, y + 14, escape_xml(name), x, y + 3, len, row_h - 6, v >= 0.0 ? "#d62728" : "#1f77b4",
            label_w + bar_w + 6.0, y + 14, v);
        y += row_h;
    }
    svg += "</svg>\n";
    return svg;
}

RenderedReport build_report(const std::string& run_dir, const ReportOptions& options) {
    const RunPaths paths{run_dir};
    check_run_dir(paths);
    LoadedTree loaded = [&] {
        try {
            return load_tree(paths.root);
        } catch (const CorruptCheckpoint& e) {
            throw CorruptRun(e.what());
        }
    }();
    const SearchTree& tree = loaded.tree;
    if (tree.empty()) throw CorruptRun("search tree has no nodes");
    RunConfig config;
    try {
        config = parse_config(read_file(paths.config()), paths.root);
    } catch (const std::exception& e) {
        throw CorruptRun(std::string("stored config is unreadable: ") + e.what());
    }
    Samples samples;
    try {
        samples = {load_trials_csv(paths.samples("train")), load_trials_csv(paths.samples("valid")),
                   load_trials_csv(paths.samples("test"))};
    } catch (const std::exception& e) {
        throw CorruptRun(std::string("cannot read samples: ") + e.what());
    }

    const SearchNode& best = tree.node(tree.best());
    const PlanSet& plans = tree.plans(best.id);
    const DesignMatrix all = read_matrix(paths.features(best.plan_set_hash), plans);
    NodeModel model = train_node(select_rows(all, ids_of(samples.train)), select_rows(all, ids_of(samples.valid)),
                                 samples, config.metric, config.search.seed);
    if (!(std::abs(model.score - best.score) <= kScoreTolerance)) {
        throw CorruptRun(fmt::format("recomputed validation score {} differs from the recorded {}", model.score, best.score));
    }
    const Classifier& chosen = model.bundle.best();
    const MetricReport valid_metrics = metric_report(chosen.predict_proba(model.valid.values), labels_of(model.valid, samples.valid));

    json doc;
    doc["format_version"] = kRunFormatVersion;
    doc["task"] = config.task;
    doc["metric"] = std::string(to_string(config.metric));
    doc["status"] = loaded.document.value("status", "running");
    doc["rollouts_done"] = loaded.document.value("rollouts_done", 0);
    doc["samples"] = {{"train", samples.train.size()}, {"valid", samples.valid.size()}, {"test", samples.test.size()}};

    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
        nodes.push_back({{"id", n.id},
                         {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                         {"action", n.action ? n.action->summary() : std::string("root")},
                         {"score", n.score},
                         {"q", n.q},
                         {"n", n.n},
                         {"depth", n.depth},
                         {"features", tree.plans(n.id).size()}});
    }
    doc["nodes"] = nodes;

    json best_json = {{"node", best.id},
                      {"model", kModelNames[model.bundle.selected]},
                      {"model_validation_scores", model.bundle.validation_scores},
                      {"degenerate", model.bundle.degenerate},
                      {"validation", metrics_json(valid_metrics)},
                      {"test", nullptr}};

    const auto importances = sorted_by_magnitude(feature_importances(model));
    json imp = json::array();
    for (const auto& [name, v] : importances) imp.push_back({{"feature", name}, {"importance", v}});
    doc["feature_importance"] = imp;
    doc["plans"] = to_json(plans);

    json shap = json::array();
    std::map<std::string, std::vector<std::pair<std::string, double>>> shap_by_trial;
    std::map<std::string, double> prob_by_trial;
    const std::string test_path = paths.test_features(best.plan_set_hash);
    if (fs::exists(test_path)) {
        const DesignMatrix test = read_matrix(test_path, plans);
        const auto y_test = labels_of(test, samples.test);
        const auto probs = chosen.predict_proba(test.values);
        best_json["test"] = metrics_json(metric_report(probs, y_test));
        if (const LogisticRegression* lr = model.bundle.logistic()) {
            const Eigen::RowVectorXd background = column_means(model.train.values);
            const Eigen::VectorXd logits = lr->logits(test.values);
            for (std::size_t i = 0; i < test.rows(); ++i) {
                const auto phi = linear_shap(*lr, test.values.row(static_cast<Eigen::Index>(i)), background);
                const auto contributions = sorted_by_magnitude(aggregate_by_feature(test, phi));
                json c = json::array();
                for (const auto& [name, v] : contributions) c.push_back({{"feature", name}, {"phi", v}});
                shap.push_back({{"nct_id", test.row_ids[i]},
                                {"label", y_test[i]},
                                {"probability", probs[i]},
                                {"logit", logits[static_cast<Eigen::Index>(i)]},
                                {"contributions", c}});
                shap_by_trial[test.row_ids[i]] = contributions;
                prob_by_trial[test.row_ids[i]] = probs[i];
            }
        }
    }
    doc["best"] = best_json;
    doc["shap"] = shap;

    RenderedReport out;
    for (const auto& id : options.trials) {
        auto it = shap_by_trial.find(id);
        if (it == shap_by_trial.end()) throw std::invalid_argument("no SHAP values for trial " + id + " (not a test trial?)");
        out.charts.emplace_back(id, render_shap_svg(fmt::format("{}  p = {:.3f}", id, prob_by_trial.at(id)), it->second));
    }

    std::string text = fmt::format("# Run report\n\nTask: {}\n\nStatus: {} after {} rollout(s); {} node(s).\n\n",
                                   config.task, doc["status"].get<std::string>(), doc["rollouts_done"].get<int>(),
                                   tree.size());
    text += fmt::format("## Best feature set (node {}, {})\n\n", best.id, kModelNames[model.bundle.selected]);
    text += "| split | ROC-AUC | PR-AUC | F1 |\n|---|---|---|---|\n";
    text += fmt::format("| validation | {} | {} | {} |\n", fmt_metric(best_json["validation"]["roc_auc"]),
                        fmt_metric(best_json["validation"]["pr_auc"]), fmt_metric(best_json["validation"]["f1"]));
    if (!best_json["test"].is_null()) {
        text += fmt::format("| test | {} | {} | {} |\n", fmt_metric(best_json["test"]["roc_auc"]),
                            fmt_metric(best_json["test"]["pr_auc"]), fmt_metric(best_json["test"]["f1"]));
    }
    text += "\n## Feature importance\n\n";
    for (const auto& [name, v] : importances) text += fmt::format("- {}: {:.4f}\n", name, v);
    text += "\n## Features\n\n";
    for (const auto& [name, plan] : plans) text += fmt::format("- **{}**: {}\n", name, plan.feature_idea);
    text += "\n## Search tree\n\n| id | parent | action | score | q | n | depth |\n|---|---|---|---|---|---|---|\n";
    for (const auto& n : tree.nodes()) {
        text += fmt::format("| {} | {} | {} | {:.4f} | {:.4f} | {} | {} |\n", n.id,
                            n.parent ? std::to_string(*n.parent) : std::string("-"),
                            n.action ? n.action->summary() : std::string("root"), n.score, n.q, n.n, n.depth);
    }
    if (!shap.empty()) {
        text += "\n## Test trial explanations (logistic model, logit scale)\n\n";
        for (const auto& s : shap) {
            text += fmt::format("- {} (label {}, p = {:.3f}):", s["nct_id"].get<std::string>(), s["label"].get<int>(),
                                s["probability"].get<double>());
            const auto& c = s["contributions"];
            for (std::size_t i = 0; i < std::min<std::size_t>(3, c.size()); ++i) {
                text += fmt::format(" {} {:+.3f}{}", c[i]["feature"].get<std::string>(), c[i]["phi"].get<double>(),
                                    i + 1 < std::min<std::size_t>(3, c.size()) ? "," : "");
            }
            text += "\n";
        }
    }
    out.document = std::move(doc);
    out.text = std::move(text);
    return out;
}

void write_report(const std::string& run_dir, const RenderedReport& report) {
    const RunPaths paths{run_dir};
    write_file_atomic(paths.report_json(), report.document.dump(2) + "\n");
    write_file_atomic(paths.report_text(), report.text);
    if (!report.charts.empty()) fs::create_directories(fs::path(run_dir) / "shap");
    for (const auto& [id, svg] : report.charts) write_file_atomic(paths.shap_svg(id), svg);
}

}  // namespace autoct
