#include "scenario.hpp"

#include "autoct/common/hash.hpp"
#include "autoct/common/rng.hpp"
#include "autoct/common/text.hpp"
#include "autoct/domain/dataset.hpp"
#include "autoct/llm/structured.hpp"
#include "autoct/pipeline/config.hpp"
#include "autoct/pipeline/run.hpp"
#include "autoct/retrieval/embedder.hpp"
#include "autoct/retrieval/index.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

namespace autoct::testing {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kVocabulary[] = {"oncology", "vaccine",  "dose",     "randomized", "placebo",   "safety",
                                   "efficacy", "biomarker", "approval", "regulatory", "phase",     "enrollment",
                                   "sponsor",  "industry", "academic", "endpoint",   "survival",  "response",
                                   "toxicity", "cohort",   "blinded",  "open",       "label",     "pediatric",
                                   "adult",    "infusion", "oral",     "trial",      "mechanism", "precedent"};

std::string words(Rng& rng, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += kVocabulary[rng.uniform_index(std::size(kVocabulary))];
    }
    return out;
}

std::vector<TrialRecord> make_trials(Rng& rng, std::size_t n, std::size_t offset) {
    std::vector<TrialRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "NCT%08zu", 2000000 + offset + i);
        const int label = i < 2 ? static_cast<int>(i) : (rng.uniform_unit() < 0.5 ? 1 : 0);
        const Date start = Date::from_ymd(2008, 1, 1).plus_days(static_cast<std::int64_t>(rng.uniform_index(12 * 365)));
        out.push_back({id, label, start, Phase::II});
    }
    return out;
}

std::uint64_t bucket(const std::string& nct, const std::string& feature) { return fnv1a64(nct + ":" + feature); }

std::string capture(const std::string& text, const std::regex& re) {
    std::smatch m;
    return std::regex_search(text, m, re) ? m[1].str() : std::string();
}

json plan_for(const std::string& name) {
    auto plan = [&](json type, json possible, std::string idea) {
        return json{{"feature_name", name},
                    {"feature_idea", idea},
                    {"feature_type", type},
                    {"data_sources", {"current_trial_summary", "pubmed"}},
                    {"example_values", json::array()},
                    {"possible_values", possible},
                    {"feature_instructions", "Read the trial registration and related literature to determine " + name + "."}};
    };
    if (name == kSeparatorFeature) {
        return plan({{"value", "boolean"}}, json::object(),
                    "Whether a drug with the same mechanism had regulatory approval before the trial start.");
    }
    if (name == "enrollment_size") return plan({{"value", "integer"}}, json::object(), "Number of enrolled participants.");
    if (name == "has_placebo_arm") return plan({{"value", "boolean"}}, json::object(), "Whether the trial has a placebo arm.");
    if (name == "sponsor_type") {
        return plan({{"sponsor_type", "categorical"}}, {{"sponsor_type", {"industry", "academic", "government"}}},
                    "Type of the lead sponsor.");
    }
    if (name == "masking_level") {
        return plan({{"masking_level", "categorical"}}, {{"masking_level", {"none", "single", "double", "triple"}}},
                    "Masking of the trial.");
    }
    return plan({{"value", "float"}}, json::object(), "Numeric score for " + name + ".");
}

json value_for(const std::string& nct, const std::string& feature, int label) {
    const std::uint64_t h = bucket(nct, feature);
    if (feature == kSeparatorFeature) return {{"value", label == 1}};
    if (feature == "enrollment_size") return {{"value", static_cast<std::int64_t>(20 + h % 480)}};
    if (feature == "has_placebo_arm") return {{"value", (h >> 7) % 2 == 0}};
    if (feature == "sponsor_type") {
        static const char* kinds[] = {"industry", "academic", "government"};
        return {{"sponsor_type", kinds[h % 3]}};
    }
    if (feature == "masking_level") {
        static const char* kinds[] = {"none", "single", "double", "triple"};
        return {{"masking_level", kinds[h % 4]}};
    }
    return {{"value", static_cast<double>(h % 1000) / 1000.0}};
}

json idea(const std::string& name, const std::string& description) {
    return {{"feature_name", name}, {"description", description}};
}

std::string react_step(const ChatRequest& r, const std::vector<std::string>& actions, const std::string& final) {
    std::size_t turn = 0;
    for (const auto& m : r.messages) turn += m.role == Role::Tool ? 1 : 0;
    if (turn < actions.size()) return actions[turn];
    return final;
}

}  // namespace

ScenarioData make_scenario(std::uint64_t seed, std::size_t n_train, std::size_t n_valid, std::size_t n_test) {
    Rng rng(seed);
    ScenarioData d;
    d.train = make_trials(rng, n_train, 0);
    d.valid = make_trials(rng, n_valid, 100000);
    d.test = make_trials(rng, n_test, 200000);
    for (std::size_t i = 0; i < 240; ++i) {
        const Date date = Date::from_ymd(2000, 1, 1).plus_days(static_cast<std::int64_t>(rng.uniform_index(22 * 365)));
        d.pubmed.push_back({"PMID" + std::to_string(10000 + i), Source::PubMed, words(rng, 6), words(rng, 40), date,
                            std::nullopt});
    }
    for (const auto* split : {&d.train, &d.valid, &d.test}) {
        for (const auto& t : *split) {
            d.trials.push_back({t.nct_id, Source::Nct, "Study " + t.nct_id + " " + words(rng, 4), words(rng, 30),
                                t.start_date, t.nct_id});
        }
    }
    return d;
}

void write_scenario(const ScenarioData& data, const std::string& dir) {
    fs::create_directories(dir);
    const std::pair<const char*, const std::vector<TrialRecord>*> splits[] = {
        {"train", &data.train}, {"valid", &data.valid}, {"test", &data.test}};
    for (const auto& [name, trials] : splits) {
        std::ostringstream out;
        write_trials_csv(out, *trials);
        write_file_atomic(dir + "/" + name + ".csv", out.str());
    }
    auto emb = std::make_shared<HashingEmbedder>(64);
    RetrievalIndex::build(data.pubmed, emb).save(dir + "/pubmed");
    RetrievalIndex::build(data.trials, emb).save(dir + "/trials");
}

std::string scenario_config_text(const ScenarioConfig& c) {
    std::ostringstream o;
    o << "[data]\n"
      << "task = Predict whether the clinical trial succeeds.\n"
      << "metric = roc_auc\n"
      << "train = " << c.data_dir << "/train.csv\n"
      << "valid = " << c.data_dir << "/valid.csv\n"
      << "test = " << c.data_dir << "/test.csv\n"
      << "pubmed_index = " << c.data_dir << "/pubmed\n"
      << "trials_index = " << c.data_dir << "/trials\n"
      << "output_dir = " << c.output_dir << "\n\n"
      << "[sampling]\n"
      << "train_size = " << c.sample_size << "\nvalid_size = " << c.sample_size << "\ntest_size = " << c.sample_size
      << "\nseed = " << c.seed << "\n\n"
      << "[search]\n"
      << "rollouts = " << c.rollouts << "\n\n"
      << "[llm]\n"
      << "mode = " << c.mode << "\n"
      << "cache_dir = " << c.cache_dir << "\n";
    return o.str();
}

ScenarioBackend::ScenarioBackend(const ScenarioData& data) {
    for (const auto* split : {&data.train, &data.valid, &data.test}) {
        for (const auto& t : *split) labels_[t.nct_id] = t.label;
    }
}

std::string ScenarioBackend::complete(const ChatRequest& r) {
    ++calls_;
    const std::string& user = r.messages.front().content;
    const std::string all = r.system + "\n" + user;
    auto has = [&](const char* phrase) { return all.find(phrase) != std::string::npos; };

    if (has("Propose a comprehensive list of feature ideas")) {
        json ideas = json::array();
        for (const char* n : {"enrollment_size", "sponsor_type", "has_placebo_arm", "masking_level", "number_of_sites",
                              "primary_endpoint_type", "trial_duration_months", "age_range_category",
                              "intervention_count", "biomarker_driven"}) {
            ideas.push_back(idea(n, std::string("Trial attribute ") + n + "."));
        }
        return "Let me think.\n" + ideas.dump(2);
    }
    if (has("deduce key factors")) {
        json factors = json::array({idea("Enrollment Size", "Larger trials are better powered."),
                                    idea("Sponsor Type", "Industry sponsors run more trials to approval."),
                                    idea("Placebo Arm", "Placebo control affects measured efficacy."),
                                    idea("Number of Sites", "Multi-site trials recruit faster."),
                                    idea("Endpoint Type", "Surrogate endpoints are easier to meet.")});
        return react_step(r, {R"({"thought": "look for similar trials", "action": "search_trials", "args": {"query": "sponsor enrollment placebo"}})"},
                          json{{"thought", "done"}, {"final", factors}}.dump());
    }
    if (has("Merge several lists")) {
        return json::array({idea("enrollment_size", "Number of enrolled participants."),
                            idea("sponsor_type", "Type of the lead sponsor."),
                            idea("has_placebo_arm", "Whether the trial has a placebo arm.")})
            .dump();
    }
    if (has("defining a feature schema")) {
        static const std::regex name_re(R"(Feature name: (\S+))");
        return "```json\n" + plan_for(capture(user, name_re)).dump(2) + "\n```";
    }
    if (has("Cluster them into logical groups")) {
        const auto start = user.find('[');
        json names = json::array();
        if (start != std::string::npos) {
            for (const auto& v : extract_json_values(user.substr(start))) {
                if (!v.is_array()) continue;
                for (const auto& item : v) {
                    if (item.is_object() && item.contains("feature_name")) names.push_back(item["feature_name"]);
                }
                break;
            }
        }
        return json::array({names}).dump();
    }
    if (has("Instructions (Researcher)")) {
        return react_step(
            r, {R"({"thought": "search the literature", "action": "search_pubmed", "args": {"query": "regulatory approval mechanism"}})"},
            R"({"thought": "enough", "final": "The registration and prior literature were reviewed."})");
    }
    if (has("Instructions (Builder)")) {
        static const std::regex nct_re(R"(NCT ID: (\S+))");
        const std::string nct = capture(user, nct_re);
        const auto plans_at = user.find("Feature Plans:\n");
        const auto research_at = user.find("\n\nResearch results:");
        json plans = json::object();
        if (plans_at != std::string::npos && research_at != std::string::npos) {
            plans = json::parse(user.substr(plans_at + 15, research_at - plans_at - 15));
        }
        const auto label = labels_.find(nct);
        json values = json::object();
        for (const auto& [name, plan] : plans.items()) {
            values[name] = label == labels_.end() ? json(nullptr) : value_for(nct, name, label->second);
        }
        return json{{"feature_values", values}}.dump();
    }
    if (has("limit to a maximum of 2-3 suggestions")) {
        const bool have_separator = user.find(std::string("\"") + kSeparatorFeature + "\"") != std::string::npos;
        if (have_separator) {
            return json::array({std::string("Remove '") + kSeparatorFeature + "' to test whether the model relies on it."})
                .dump();
        }
        return json::array({"Refine 'sponsor_type' to separate large and small industry sponsors.",
                            std::string("Add a feature '") + kSeparatorFeature +
                                "' indicating whether a drug with the same mechanism was approved before the trial started.",
                            "Remove 'has_placebo_arm' as it shows no importance."})
            .dump();
    }
    if (has("an example of an incorrect prediction")) {
        const bool have_masking = user.find("\"masking_level\"") != std::string::npos;
        return react_step(r, {R"({"thought": "check the record", "action": "get_trial_summary", "args": {}})"},
                          have_masking ? R"({"thought": "nothing to add", "final": []})"
                                       : R"({"thought": "masking matters", "final": ["Add 'masking_level' describing the blinding of the trial."]})");
    }
    if (has("Turn the suggestion into exactly one concrete change")) {
        static const std::regex suggestion_re(R"(Suggestion: ([^\n]*))");
        static const std::regex quoted_re(R"('([a-z_]+)')");
        const std::string s = capture(user, suggestion_re);
        const std::string target = capture(s, quoted_re);
        if (s.rfind("Remove", 0) == 0) return json{{"action", "remove"}, {"feature_name", target}, {"description", ""}}.dump();
        if (s.rfind("Refine", 0) == 0) {
            return json{{"action", "refine"}, {"feature_name", target}, {"description", "Refined: " + s}}.dump();
        }
        return json{{"action", "add"}, {"feature_name", target}, {"description", s}}.dump();
    }
    throw BackendFailure("scenario backend has no script for this request");
}

RecordedScenario record_scenario(const std::string& root, std::uint64_t seed, int rollouts) {
    fs::remove_all(root);
    RecordedScenario out{make_scenario(seed), root + "/data", root + "/cache"};
    write_scenario(out.data, out.data_dir);
    ScenarioConfig c{out.data_dir, out.cache_dir, root + "/record-run", "live", rollouts, seed};
    RunOptions options;
    options.network = std::make_shared<ScenarioBackend>(out.data);
    const RunOutcome outcome = run_pipeline(parse_config(scenario_config_text(c), root), options);
    if (outcome.exit_code != kExitOk) throw std::runtime_error("scenario recording failed: " + outcome.message);
    return out;
}

}  // namespace autoct::testing
