#include "autoct/pipeline/context.hpp"

#include "autoct/common/hash.hpp"
#include "autoct/common/rng.hpp"
#include "autoct/common/text.hpp"
#include "autoct/llm/backend.hpp"
#include "autoct/pipeline/sampling.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace autoct {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string batch_hash(const std::vector<FeaturePlan>& plans) {
    json arr = json::array();
    for (const auto& p : plans) arr.push_back(to_json(p));
    return sha256_hex(arr.dump());
}

std::vector<std::string> ids_of(const std::vector<TrialRecord>& trials) {
    std::vector<std::string> ids;
    for (const auto& t : trials) ids.push_back(t.nct_id);
    return ids;
}

std::vector<int> labels_for(const DesignMatrix& m, const std::vector<TrialRecord>& trials) {
    std::map<std::string, int> label;
    for (const auto& t : trials) label[t.nct_id] = t.label;
    std::vector<int> y;
    for (const auto& id : m.row_ids) y.push_back(label.at(id));
    return y;
}

void write_matrix(const std::string& path, const DesignMatrix& m) {
    if (fs::exists(path)) return;
    std::ostringstream out;
    write_design_csv(out, m);
    write_file_atomic(path, out.str());
}

std::vector<FeaturePlan> plan_list(const PlanSet& plans) {
    std::vector<FeaturePlan> out;
    for (const auto& [name, plan] : plans) out.push_back(plan);
    return out;
}

}  // namespace

FeatureStore::FeatureStore(const Agents& agents, std::string dir) : agents_(agents), dir_(std::move(dir)) {}

void FeatureStore::load() {
    batches_.clear();
    owner_.clear();
    if (!fs::exists(dir_)) return;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir_)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Batch b;
        try {
            const json j = json::parse(read_file(f.string()));
            for (const auto& p : j.at("plans")) b.plans.push_back(plan_from_json(p));
            for (const auto& [id, v] : j.at("values").items()) b.values[id] = value_set_from_json(v);
        } catch (const std::exception& e) {
            throw CorruptRun("unreadable value batch " + f.filename().string() + ": " + e.what());
        }
        b.hash = batch_hash(b.plans);
        if (b.hash != f.stem().string()) throw CorruptRun("value batch " + f.filename().string() + " does not match its hash");
        const std::size_t index = batches_.size();
        for (const auto& p : b.plans) owner_.try_emplace(plan_hash(p), index);
        batches_.push_back(std::move(b));
    }
}

void FeatureStore::save(const Batch& batch) const {
    json plans = json::array();
    for (const auto& p : batch.plans) plans.push_back(to_json(p));
    json values = json::object();
    for (const auto& [id, v] : batch.values) values[id] = to_json(v);
    fs::create_directories(dir_);
    write_file_atomic(dir_ + "/" + batch.hash + ".json", json{{"plans", plans}, {"values", values}}.dump(1) + "\n");
}

void FeatureStore::ensure(const std::vector<FeaturePlan>& plans, const std::vector<TrialRecord>& trials) {
    std::vector<FeaturePlan> fresh;
    for (const auto& p : plans) {
        if (!owner_.contains(plan_hash(p))) fresh.push_back(p);
    }
    if (!fresh.empty()) {
        std::map<std::string, const FeaturePlan*> by_name;
        for (const auto& p : fresh) by_name[p.feature_name] = &p;
        for (const auto& group : agents_.group_features(fresh)) {
            Batch b;
            for (const auto& name : group) b.plans.push_back(*by_name.at(name));
            b.hash = batch_hash(b.plans);
            const std::size_t index = batches_.size();
            for (const auto& p : b.plans) owner_.try_emplace(plan_hash(p), index);
            // Persist the grouping before building so a resumed run reuses it.
            save(b);
            batches_.push_back(std::move(b));
        }
    }

    std::set<std::size_t> touched;
    for (const auto& p : plans) touched.insert(owner_.at(plan_hash(p)));
    for (std::size_t index : touched) {
        Batch& b = batches_[index];
        std::vector<TrialRecord> missing;
        for (const auto& t : trials) {
            if (!b.values.contains(t.nct_id)) missing.push_back(t);
        }
        if (missing.empty()) continue;
        std::vector<std::string> names;
        for (const auto& p : b.plans) names.push_back(p.feature_name);
        spdlog::info("building {} feature(s) for {} trial(s)", names.size(), missing.size());
        for (auto& v : agents_.build_features(missing, b.plans, {names})) b.values[v.nct_id] = std::move(v);
        save(b);
    }
}

std::vector<FeatureValueSet> FeatureStore::values(const PlanSet& plans, const std::vector<TrialRecord>& trials) const {
    std::vector<FeatureValueSet> out;
    for (const auto& t : trials) {
        FeatureValueSet v;
        v.nct_id = t.nct_id;
        for (const auto& [name, plan] : plans) {
            const Batch& b = batches_.at(owner_.at(plan_hash(plan)));
            const FeatureValueSet& built = b.values.at(t.nct_id);
            v.values[name] = built.values.at(name);
            if (auto it = built.none_reasons.find(name); it != built.none_reasons.end()) v.none_reasons[name] = it->second;
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::uint64_t training_seed(std::uint64_t run_seed) { return mix_seed(run_seed, "train"); }

NodeModel train_node(DesignMatrix train, DesignMatrix valid, const Samples& samples, Metric metric,
                     std::uint64_t run_seed) {
    NodeModel m;
    const auto y_train = labels_for(train, samples.train);
    const auto y_valid = labels_for(valid, samples.valid);
    m.bundle = train_bundle(train.values, y_train, training_seed(run_seed));
    select_model(m.bundle, valid.values, y_valid, metric);
    m.score = m.bundle.validation_scores[m.bundle.selected];
    m.train = std::move(train);
    m.valid = std::move(valid);
    return m;
}

std::map<std::string, double> feature_importances(const NodeModel& model) {
    return aggregate_by_feature(model.train, model.bundle.best().importances());
}

json checkpoint_extra(int rollouts_done, std::string_view status) {
    return {{"rollouts_done", rollouts_done}, {"status", std::string(status)}};
}

PipelineContext::PipelineContext(const RunConfig& config, RunPaths paths, const Agents& agents, FeatureStore& store,
                                 Samples samples)
    : config_(config), paths_(std::move(paths)), agents_(agents), store_(store), samples_(std::move(samples)) {
    for (const auto& t : samples_.test) test_ids_.insert(t.nct_id);
}

void PipelineContext::guard_trials(const std::vector<TrialRecord>& trials) const {
    if (!test_sealed_) return;
    for (const auto& t : trials) {
        if (test_ids_.contains(t.nct_id)) throw TestIsolationViolation("test trial " + t.nct_id + " used during search");
    }
}

NodeModel PipelineContext::simulate(const PlanSet& plans) {
    std::vector<TrialRecord> trials = samples_.train;
    trials.insert(trials.end(), samples_.valid.begin(), samples_.valid.end());
    guard_trials(trials);
    store_.ensure(plan_list(plans), trials);
    DesignMatrix m = encode(plans, store_.values(plans, trials));
    write_matrix(paths_.features(plan_set_hash(plans)), m);
    return train_node(select_rows(m, ids_of(samples_.train)), select_rows(m, ids_of(samples_.valid)), samples_,
                      config_.metric, config_.search.seed);
}

void PipelineContext::build_test_features(const PlanSet& plans) {
    if (test_sealed_) throw TestIsolationViolation("test features requested before the search finished");
    store_.ensure(plan_list(plans), samples_.test);
    write_matrix(paths_.test_features(plan_set_hash(plans)), encode(plans, store_.values(plans, samples_.test)));
}

std::vector<Suggestion> PipelineContext::suggestions_for(const PlanSet& plans, const NodeModel& model, int node_id) {
    EvaluatorInput input{config_.metric, model.score, plans, feature_importances(model)};
    const auto probs = model.bundle.best().predict_proba(model.valid.values);
    std::map<std::string, const TrialRecord*> by_id;
    for (const auto& t : samples_.valid) by_id[t.nct_id] = &t;
    std::vector<TrialRecord> wrong;
    std::map<std::string, double> prob_of;
    for (std::size_t i = 0; i < model.valid.rows(); ++i) {
        const TrialRecord& t = *by_id.at(model.valid.row_ids[i]);
        const int predicted = probs[i] >= 0.5 ? 1 : 0;
        if (predicted != t.label) {
            wrong.push_back(t);
            prob_of[t.nct_id] = probs[i];
        }
    }
    const auto picked = uniform_sample(wrong, static_cast<std::size_t>(config_.search.n_error_examples),
                                       mix_seed(config_.search.seed, "errors:" + std::to_string(node_id)));
    std::vector<MisclassifiedExample> examples;
    if (!picked.empty()) {
        const auto values = store_.values(plans, picked);
        for (std::size_t i = 0; i < picked.size(); ++i) {
            const double p = prob_of.at(picked[i].nct_id);
            examples.push_back({picked[i], p >= 0.5 ? 1 : 0, p, values[i].values, values[i].none_reasons});
        }
    }
    return agents_.evaluate(input, examples);
}

Simulation PipelineContext::initialize() {
    std::vector<TrialRecord> pos;
    std::vector<TrialRecord> neg;
    for (const auto& t : samples_.train) (t.label == 1 ? pos : neg).push_back(t);
    const auto seed = config_.search.seed;
    pos = uniform_sample(pos, static_cast<std::size_t>(config_.search.n_factor_pos), mix_seed(seed, "factor_pos"));
    neg = uniform_sample(neg, static_cast<std::size_t>(config_.search.n_factor_neg), mix_seed(seed, "factor_neg"));
    guard_trials(pos);
    guard_trials(neg);

    const auto ideas = agents_.propose_initial(pos, neg);
    spdlog::info("{} initial feature ideas", ideas.size());
    PlanSet plans;
    for (const auto& idea : ideas) {
        try {
            FeaturePlan p = agents_.plan_feature(idea);
            plans.emplace(p.feature_name, std::move(p));
        } catch (const BackendFailure&) {
            throw;
        } catch (const Error& e) {
            spdlog::warn("dropping idea {}: {}", idea.feature_name, e.what());
        }
    }
    if (plans.empty()) throw EmptyProposal("no initial feature idea produced a valid plan");
    NodeModel model = simulate(plans);
    auto suggestions = suggestions_for(plans, model, 0);
    return {std::move(plans), model.score, std::move(suggestions)};
}

std::optional<Expansion> PipelineContext::expand(const SearchTree& tree, int parent, const Suggestion& suggestion) {
    const PlanSet& active = tree.plans(parent);
    ProposalAction action = agents_.propose_iterative(suggestion, active);
    std::optional<FeaturePlan> plan;
    if (action.kind() != ActionKind::Remove) plan = agents_.plan_feature(*action.idea());
    PlanSet next = apply_proposal(active, action, plan);
    if (next.empty()) {
        spdlog::warn("{} would leave no features; skipped", action.summary());
        return std::nullopt;
    }
    NodeModel model = simulate(next);
    auto suggestions = suggestions_for(next, model, static_cast<int>(tree.size()));
    return Expansion{std::move(action), {std::move(next), model.score, std::move(suggestions)}};
}

void PipelineContext::checkpoint(const SearchTree& tree, int rollouts_done) {
    save_tree(tree, paths_.root, checkpoint_extra(rollouts_done, "running"));
    if (on_checkpoint) on_checkpoint(tree, rollouts_done);
}

}  // namespace autoct
