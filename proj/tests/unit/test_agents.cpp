#include "autoct/agents/agents.hpp"
#include "autoct/agents/prompts.hpp"
#include "autoct/agents/tools.hpp"
#include "autoct/llm/structured.hpp"
#include "autoct/retrieval/embedder.hpp"
#include "autoct/retrieval/index.hpp"
#include "../support/fixtures.hpp"
#include "autoct/common/rng.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <mutex>
#include <set>

using namespace autoct;
using autoct::testing::fixture_json;
using autoct::testing::fixture_text;
using nlohmann::json;

namespace {

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::size_t tool_turns(const ChatRequest& r) {
    std::size_t n = 0;
    for (const auto& m : r.messages) n += m.role == Role::Tool ? 1 : 0;
    return n;
}

const std::string& first_user(const ChatRequest& r) { return r.messages.front().content; }

std::shared_ptr<const PromptLibrary> prompts() { return std::make_shared<PromptLibrary>(AUTOCT_PROMPTS_DIR); }

TrialRecord trial(const std::string& id, int label, const std::string& date) {
    return {id, label, Date::parse_or_throw(date), std::nullopt};
}

PlanSet worked_plans() { return plan_set_from_json(fixture_json("worked/planner_response.json")); }

std::vector<FeaturePlan> pick(const PlanSet& plans, const std::vector<std::string>& names) {
    std::vector<FeaturePlan> out;
    for (const auto& n : names) out.push_back(plans.at(n));
    return out;
}

/// Small corpora with documents on both sides of 2011-01-01.
struct Corpora {
    RetrievalIndex pubmed;
    RetrievalIndex trials;
};

Corpora make_corpora() {
    auto emb = std::make_shared<HashingEmbedder>(64);
    std::vector<Document> pm;
    std::vector<Document> ct;
    const char* words[] = {"dengue vaccine subcutaneous dose", "intradermal dengue immunogenicity",
                           "oncology trial maximum tolerated dose", "vaccine safety reactogenicity"};
    for (int i = 0; i < 40; ++i) {
        const Date d = Date::from_ymd(2005 + i % 12, 1 + i % 12, 1 + i % 28);
        pm.push_back({"pm" + std::to_string(i), Source::PubMed, "paper " + std::to_string(i), words[i % 4], d, std::nullopt});
        const std::string nct = "NCT9" + std::to_string(1000000 + i);
        ct.push_back({nct, Source::Nct, "trial " + std::to_string(i), words[(i + 1) % 4], d, nct});
    }
    ct.push_back({"NCT01224639", Source::Nct, "Dengue vaccine study", "subcutaneous and intradermal dengue vaccine",
                  Date::parse_or_throw("2011-01-01"), std::string("NCT01224639")});
    return {RetrievalIndex::build(pm, emb), RetrievalIndex::build(ct, emb)};
}

/// Plays the worked example responses: ReAct agents make three tool calls before answering.
std::string worked_reply(const ChatRequest& r) {
    const std::string& sys = r.system;
    const std::string& user = first_user(r);
    auto react = [&](const std::string& final) -> std::string {
        const std::size_t turn = tool_turns(r);
        if (turn == 0) return R"({"thought": "search", "action": "search_pubmed", "args": {"query": "dengue vaccine dose"}})";
        if (turn == 1) return R"({"thought": "trials", "action": "search_trials", "args": {"query": "dengue vaccine", "k": 7}})";
        if (turn == 2) return R"({"thought": "own record", "action": "get_trial_summary", "args": {}})";
        return final;
    };
    if (contains(sys + user, "Propose a comprehensive list of feature ideas")) {
        return "Thinking step by step.\n```json\n" + fixture_text("worked/zero_shot_response.json") + "\n```";
    }
    if (contains(sys + user, "deduce key factors")) {
        return react(json{{"thought", "done"}, {"final", fixture_json("worked/factor_response.json")}}.dump());
    }
    if (contains(sys + user, "Merge several lists")) return fixture_text("replay/summarizer_response.json");
    if (contains(sys + user, "Instructions (Researcher)")) {
        return react(json{{"thought", "done"}, {"final", fixture_text("worked/researcher_response.txt")}}.dump());
    }
    if (contains(sys + user, "Instructions (Builder)")) return fixture_text("worked/builder_response.json");
    if (contains(sys + user, "defining a feature schema")) return fixture_text("worked/planner_response.json");
    if (contains(sys + user, "limit to a maximum of 2-3 suggestions")) {
        return fixture_text("worked/model_evaluator_response.json");
    }
    if (contains(sys + user, "an example of an incorrect prediction")) {
        return react(fixture_text("worked/error_evaluator_response.txt"));
    }
    if (contains(sys + user, "Cluster them into logical groups")) {
        return R"([["route_of_administration", "dosing_regimen", "previous_trial_success_rate"]])";
    }
    if (contains(sys + user, "Turn the suggestion into exactly one concrete change")) {
        const std::string suggestion = user.substr(user.rfind("Suggestion: "));
        if (contains(suggestion, "gender_inclusion")) return R"({"action": "remove", "feature_name": "gender_inclusion"})";
        if (contains(suggestion, "historical trial outcomes")) {
            return R"({"action": "add", "feature_name": "historical_trial_outcomes", "description": "Success rate of earlier trials in the same therapeutic area."})";
        }
        if (contains(suggestion, "intervention_type")) {
            return R"({"action": "refine", "feature_name": "intervention_type", "description": "Intervention type including combination therapies."})";
        }
    }
    throw BackendFailure("unscripted request");
}

struct Harness {
    Corpora corpora = make_corpora();
    std::mutex mu;
    std::vector<ToolCallRecord> observed;
    std::atomic<int> calls{0};

    Agents agents(AgentSettings settings = {}) {
        ToolContext tools;
        tools.pubmed = &corpora.pubmed;
        tools.trials = &corpora.trials;
        tools.observer = [this](const ToolCallRecord& rec) {
            std::lock_guard lock(mu);
            observed.push_back(rec);
        };
        auto backend = std::make_shared<CallbackBackend>([this](const ChatRequest& r) {
            ++calls;
            return worked_reply(r);
        });
        return Agents({backend, prompts(), tools}, settings, TaskSpec{"Predict whether the trial succeeds.", Metric::RocAuc});
    }
};

Agents scripted(std::function<std::string(const ChatRequest&)> fn, AgentSettings settings = {}) {
    return Agents({std::make_shared<CallbackBackend>(std::move(fn)), prompts(), ToolContext{}}, settings,
                  TaskSpec{"Predict whether the trial succeeds.", Metric::RocAuc});
}

std::vector<TrialRecord> samples() {
    return {trial("NCT01224639", 1, "2011-01-01"), trial("NCT81000003", 1, "2010-05-04"),
            trial("NCT81000007", 1, "2012-08-08"), trial("NCT81000011", 0, "2016-12-12"),
            trial("NCT81000013", 0, "2007-02-14"), trial("NCT81000021", 0, "2014-10-22")};
}

}  // namespace

TEST_CASE("prompt templates parse and render without leftover placeholders") {
    auto lib = prompts();
    for (const auto& name : agent_prompt_names()) {
        const auto& t = lib->get(name);
        PromptVars vars;
        for (const auto& p : placeholders(t.system + t.user)) vars[p] = "<" + p + ">";
        const auto r = lib->render(name, vars);
        CHECK_FALSE(r.system.empty());
        CHECK_FALSE(r.user.empty());
        CHECK(placeholders(r.system + r.user).empty());
    }
    CHECK_THROWS_AS(lib->render("zero_shot_proposer", {}), PromptError);
    CHECK_THROWS_AS(lib->get("no_such_prompt"), PromptError);
}

TEST_CASE("render_text substitutes in a single pass") {
    CHECK(render_text("a {{x}} b", {{"x", "{{y}}"}, {"y", "no"}}, "t") == "a {{y}} b");
    CHECK_THROWS_AS(render_text("{{missing}}", {}, "t"), PromptError);
}

TEST_CASE("ideas_from_json normalizes names and resolves collisions") {
    const auto ideas = ideas_from_json(json::parse(R"([
        {"name": "Route of Administration", "description": "a"},
        {"feature_name": "route_of_administration", "description": "b"},
        {"feature_name": "route of administration", "description": "c"},
        {"feature_name": "", "description": "skipped"}])"));
    REQUIRE(ideas.size() == 3);
    CHECK(ideas[0].feature_name == "route_of_administration");
    CHECK(ideas[1].feature_name == "route_of_administration_2");
    CHECK(ideas[2].feature_name == "route_of_administration_3");
}

TEST_CASE("propose_initial over the worked example replay") {
    Harness h;
    const auto s = samples();
    const auto agents = h.agents();
    const auto ideas =
        agents.propose_initial({s[0], s[1], s[2]}, {s[3], s[4], s[5]});
    CHECK(ideas.size() == 16);
    // 1 zero-shot + 6 factor calls of 4 turns + 1 summarizer.
    CHECK(h.calls == 1 + 6 * 4 + 1);
    std::set<std::string> names;
    for (const auto& i : ideas) {
        CHECK(is_valid_feature_name(i.feature_name));
        names.insert(i.feature_name);
    }
    CHECK(names.size() == ideas.size());
    CHECK(names.contains("intervention_type"));
    CHECK(names.contains("number_of_participants"));

    SUBCASE("replays are deterministic") {
        Harness h2;
        const auto again = h2.agents().propose_initial({s[0], s[1], s[2]}, {s[3], s[4], s[5]});
        REQUIRE(again.size() == ideas.size());
        for (std::size_t i = 0; i < ideas.size(); ++i) {
            CHECK(again[i].feature_name == ideas[i].feature_name);
            CHECK(again[i].description == ideas[i].description);
        }
    }
}

TEST_CASE("zero-shot worked example response yields at least ten ideas") {
    const auto ideas = ideas_from_json(fixture_json("worked/zero_shot_response.json"));
    CHECK(ideas.size() >= 10);
    CHECK(ideas[0].feature_name == "intervention_type");
    CHECK(ideas[1].feature_name == "number_of_participants");
    const auto factors = ideas_from_json(fixture_json("worked/factor_response.json"));
    REQUIRE(factors.size() == 5);
    CHECK(factors[0].feature_name == "route_of_administration");
}

TEST_CASE("propose_initial renames duplicate summarizer names and rejects an empty merge") {
    const std::string factor = R"({"final": [{"name": "A", "description": "x"}]})";
    auto with_summary = [&](const std::string& summary) {
        return scripted([=](const ChatRequest& r) -> std::string {
            const std::string all = r.system + first_user(r);
            if (contains(all, "Propose a comprehensive list")) return R"([{"feature_name": "a", "description": "x"}])";
            if (contains(all, "deduce key factors")) return factor;
            return summary;
        });
    };
    const auto ideas = with_summary(R"([{"feature_name": "age", "description": "x"},
                                        {"feature_name": "age", "description": "y"}])")
                           .propose_initial({trial("NCT1", 1, "2010-01-01")}, {});
    REQUIRE(ideas.size() == 2);
    CHECK(ideas[0].feature_name == "age");
    CHECK(ideas[1].feature_name == "age_2");
    CHECK_THROWS_AS((void)with_summary("[]").propose_initial({trial("NCT1", 1, "2010-01-01")}, {}), EmptyProposal);
}

TEST_CASE("propose_iterative maps the model-based suggestions to actions") {
    Harness h;
    const auto agents = h.agents();
    const PlanSet active = worked_plans();
    const auto texts = fixture_json("worked/model_evaluator_response.json");
    REQUIRE(texts.size() == 3);

    const auto add = agents.propose_iterative({texts[0], Origin::ModelBased}, active);
    CHECK(add.kind() == ActionKind::Add);
    REQUIRE(add.idea());
    CHECK(add.idea()->feature_name == "historical_trial_outcomes");
    CHECK(add.origin() == Origin::ModelBased);

    const auto refine = agents.propose_iterative({texts[1], Origin::ModelBased}, active);
    CHECK(refine.kind() == ActionKind::Refine);
    CHECK(refine.target_feature() == std::optional<std::string>("intervention_type"));

    const auto remove = agents.propose_iterative({texts[2], Origin::ErrorBased}, active);
    CHECK(remove.kind() == ActionKind::Remove);
    CHECK(remove.target_feature() == std::optional<std::string>("gender_inclusion"));
    CHECK(remove.origin() == Origin::ErrorBased);
}

TEST_CASE("propose_iterative retries once on an unknown target") {
    const PlanSet active = worked_plans();
    int calls = 0;
    auto stubborn = scripted([&](const ChatRequest&) {
        ++calls;
        return std::string(R"({"action": "remove", "feature_name": "sponsor_size"})");
    });
    CHECK_THROWS_AS((void)stubborn.propose_iterative({"drop sponsor size", Origin::ModelBased}, active), InvalidTarget);
    CHECK(calls == 2);

    int turns = 0;
    auto corrected = scripted([&](const ChatRequest& r) {
        ++turns;
        if (r.messages.size() == 1) return std::string(R"({"action": "refine", "feature_name": "sponsor_size", "description": "d"})");
        CHECK(contains(r.messages.back().content, "gender_inclusion"));
        return std::string(R"({"action": "refine", "feature_name": "funding_source", "description": "d"})");
    });
    const auto a = corrected.propose_iterative({"refine funding", Origin::ModelBased}, active);
    CHECK(turns == 2);
    CHECK(a.target_feature() == std::optional<std::string>("funding_source"));

    auto colliding = scripted([](const ChatRequest&) {
        return std::string(R"({"action": "add", "feature_name": "age_range", "description": "finer bins"})");
    });
    const auto add = colliding.propose_iterative({"add age", Origin::ModelBased}, active);
    REQUIRE(add.idea());
    CHECK(add.idea()->feature_name == "age_range_2");
}

TEST_CASE("plan_feature over the worked planner response") {
    Harness h;
    const auto agents = h.agents();
    const auto plan = agents.plan_feature({"trial_location", "Geographical location of the trial."});
    CHECK(plan.feature_name == "trial_location");
    CHECK(validate_plan(plan).empty());
    REQUIRE(plan.feature_type.at("trial_location") == FeatureType::Categorical);
    const std::vector<std::string> regions{"North America", "Europe", "Asia", "South America", "Africa", "Oceania"};
    CHECK(plan.possible_values.at("trial_location") == regions);

    const auto count = agents.plan_feature({"number_of_participants", "Enrollment."});
    CHECK(count.feature_type.size() == 1);
    CHECK(count.feature_type.at("value") == FeatureType::Integer);

    for (const auto& [name, p] : worked_plans()) {
        const auto replayed = agents.plan_feature({name, p.feature_idea});
        CHECK(replayed.feature_name == name);
        CHECK(validate_plan(replayed).empty());
    }
}

TEST_CASE("plan_feature rejects a mismatched plan after one retry") {
    int calls = 0;
    auto agents = scripted([&](const ChatRequest&) {
        ++calls;
        return std::string(R"({"feature_type": {"site": "categorical"},
                               "possible_values": {"region": ["a", "b"]},
                               "data_sources": ["pubmed"], "example_values": [],
                               "feature_instructions": "x"})");
    });
    CHECK_THROWS_AS((void)agents.plan_feature({"site", "where"}), InvalidPlan);
    CHECK(calls == 2);

    int n = 0;
    auto fixed = scripted([&](const ChatRequest&) {
        return std::string(++n == 1 ? R"({"feature_type": {"site": "categorical"}, "possible_values": {},
                                        "data_sources": [], "example_values": [], "feature_instructions": "x"})"
                                    : R"({"feature_type": {"site": "categorical"}, "possible_values": {"site": ["a"]},
                                        "data_sources": [], "example_values": [], "feature_instructions": "x"})");
    });
    const auto plan = fixed.plan_feature({"site", "where"});
    CHECK(plan.feature_idea == "where");
    CHECK(validate_plan(plan).empty());
}

TEST_CASE("group_features partitions and repairs") {
    Harness h;
    const auto plans = worked_plans();
    const auto agents = h.agents();
    const auto groups =
        agents.group_features(pick(plans, {"route_of_administration", "dosing_regimen", "previous_trial_success_rate"}));
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].size() == 3);

    const int before = h.calls;
    const auto single = agents.group_features(pick(plans, {"age_range"}));
    CHECK(single == std::vector<std::vector<std::string>>{{"age_range"}});
    CHECK(h.calls == before);

    const auto four = agents.group_features(
        pick(plans, {"route_of_administration", "dosing_regimen", "previous_trial_success_rate", "age_range"}));
    CHECK(four == std::vector<std::vector<std::string>>{
                      {"route_of_administration", "dosing_regimen", "previous_trial_success_rate"}, {"age_range"}});

    CHECK(repair_groups({{"a", "x", "b"}, {"b", "c"}}, {"a", "b", "c", "d"}, 4) ==
          std::vector<std::vector<std::string>>{{"a", "b"}, {"c"}, {"d"}});
    CHECK(repair_groups({{"a", "b", "c"}}, {"a", "b", "c"}, 2) ==
          std::vector<std::vector<std::string>>{{"a", "b"}, {"c"}});
}

TEST_CASE("repair_groups always yields an exact bounded partition") {
    Rng rng(11);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = 1 + rng.uniform_index(12);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back("f" + std::to_string(i));
        std::vector<std::vector<std::string>> proposed(rng.uniform_index(5));
        for (auto& g : proposed) {
            const std::size_t len = rng.uniform_index(7);
            for (std::size_t j = 0; j < len; ++j) g.push_back("f" + std::to_string(rng.uniform_index(n + 3)));
        }
        const std::size_t cap = 1 + rng.uniform_index(4);
        const auto groups = repair_groups(proposed, names, cap);
        std::multiset<std::string> seen;
        for (const auto& g : groups) {
            CHECK_FALSE(g.empty());
            CHECK(g.size() <= cap);
            seen.insert(g.begin(), g.end());
        }
        CHECK(seen == std::multiset<std::string>(names.begin(), names.end()));
    }
}

TEST_CASE("build_group reproduces the worked builder values") {
    Harness h;
    const auto plans = worked_plans();
    const auto agents = h.agents();
    const auto group = pick(plans, {"route_of_administration", "dosing_regimen", "previous_trial_success_rate"});
    const auto out = agents.build_group(trial("NCT01224639", 1, "2011-01-01"), group);
    CHECK(out.nct_id == "NCT01224639");
    CHECK(out.none_reasons.empty());
    CHECK(out.values.at("route_of_administration").at("route_of_administration") ==
          std::optional<FeatureValue>(std::string("subcutaneous")));
    CHECK(out.values.at("dosing_regimen").at("dosing_regimen") ==
          std::optional<FeatureValue>(std::string("multiple doses")));
    CHECK(out.values.at("previous_trial_success_rate").at("value") == std::optional<FeatureValue>(1.0));
}

TEST_CASE("build_group failure paths") {
    const auto plans = worked_plans();
    const auto group = pick(plans, {"route_of_administration", "number_of_participants"});
    auto builder = [](std::string reply) {
        return scripted([reply](const ChatRequest& r) {
            if (contains(r.system + first_user(r), "Instructions (Researcher)")) {
                return std::string(R"({"final": "Nothing relevant was found."})");
            }
            return reply;
        });
    };
    const TrialRecord t = trial("NCT5", 0, "2012-01-01");

    const auto none = builder(R"({"feature_values": {"route_of_administration": null, "number_of_participants": "None"},
                                  "explanations": {"route_of_administration": "no evidence"}})")
                          .build_group(t, group);
    CHECK(none.values.at("route_of_administration").at("route_of_administration") == std::nullopt);
    CHECK(contains(none.none_reasons.at("route_of_administration"), "no evidence"));
    CHECK(none.values.at("number_of_participants").at("value") == std::nullopt);

    const auto bad = builder(R"({"feature_values": {"route_of_administration": "nasal", "number_of_participants": 40}})")
                         .build_group(t, group);
    CHECK(contains(bad.none_reasons.at("route_of_administration"), "NOT_IN_CATEGORIES"));
    CHECK(bad.values.at("number_of_participants").at("value") == std::optional<FeatureValue>(std::int64_t{40}));

    const auto failed = builder("I cannot produce JSON.").build_group(t, group);
    REQUIRE(failed.values.size() == 2);
    CHECK(contains(failed.none_reasons.at("route_of_administration"), "AGENT_FAILURE"));
    CHECK(contains(failed.none_reasons.at("number_of_participants"), "AGENT_FAILURE"));
}

TEST_CASE("build_features covers every trial and plan in nct order") {
    Harness h;
    const auto plans = worked_plans();
    const auto group = pick(plans, {"route_of_administration", "dosing_regimen", "previous_trial_success_rate"});
    const auto agents = h.agents();
    auto trials = samples();
    const auto out = agents.build_features(trials, group, {{"route_of_administration", "dosing_regimen"},
                                                           {"previous_trial_success_rate"}});
    REQUIRE(out.size() == trials.size());
    for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].nct_id < out[i].nct_id);
    for (const auto& v : out) CHECK(v.values.size() == 3);
}

TEST_CASE("evaluators produce at most six tagged suggestions") {
    Harness h;
    const auto agents = h.agents();
    EvaluatorInput input{Metric::RocAuc, 0.71234, worked_plans(), {{"age_range", 0.2}, {"gender_inclusion", 0.0}}};
    const auto model = agents.evaluate_model(input);
    REQUIRE(model.size() == 3);
    for (const auto& s : model) CHECK(s.origin == Origin::ModelBased);

    std::vector<MisclassifiedExample> examples;
    for (const auto& t : {trial("NCT02726334", 1, "2016-04-01"), trial("NCT81000003", 0, "2010-05-04"),
                          trial("NCT81000007", 1, "2012-08-08")}) {
        examples.push_back({t, 1 - t.label, 0.4, {}, {}});
    }
    const auto all = agents.evaluate(input, examples);
    REQUIRE(all.size() == 6);
    for (std::size_t i = 0; i < 3; ++i) CHECK(all[i].origin == Origin::ModelBased);
    for (std::size_t i = 3; i < 6; ++i) {
        CHECK(all[i].origin == Origin::ErrorBased);
        CHECK(contains(all[i].text, "NCT02726334"));
    }
    CHECK(agents.evaluate(input, {}).size() == 3);

    auto silent = scripted([](const ChatRequest&) { return std::string("[]"); });
    CHECK(silent.evaluate_model(input).empty());
}

TEST_CASE("aggregate_suggestions interleaves and caps") {
    auto s = [](const char* t, Origin o) { return Suggestion{t, o}; };
    const auto out = aggregate_suggestions({s("m1", Origin::ModelBased)},
                                           {{s("a1", Origin::ErrorBased), s("a2", Origin::ErrorBased)},
                                            {s("b1", Origin::ErrorBased)}},
                                           3);
    REQUIRE(out.size() == 3);
    CHECK(out[0].text == "m1");
    CHECK(out[1].text == "a1");
    CHECK(out[2].text == "b1");
}

TEST_CASE("render_example layout") {
    MisclassifiedExample ex{trial("NCT7", 1, "2010-01-01"), 0, 0.2, {}, {{"age_range", "value: MISSING"}}};
    ex.values["age_range"]["value"] = std::nullopt;
    const std::string text = render_example(ex);
    CHECK(text.rfind("## NCT7 Predicted 0, should be 1\n\n### Features\n", 0) == 0);
    CHECK(contains(text, "### Reasons for features that are None\n"));
    CHECK(contains(text, "MISSING"));
}

TEST_CASE("agent tool observations never reach the cutoff") {
    Harness h;
    const auto s = samples();
    const auto agents = h.agents();
    (void)agents.propose_initial({s[0], s[1], s[2]}, {s[3], s[4], s[5]});
    const auto plans = worked_plans();
    (void)agents.build_features(s, pick(plans, {"route_of_administration", "dosing_regimen"}),
                                {{"route_of_administration", "dosing_regimen"}});
    REQUIRE(h.observed.size() == 6 * 3 * 2);
    std::size_t documents = 0;
    std::size_t own = 0;
    for (const auto& rec : h.observed) {
        for (const auto& d : rec.documents) {
            ++documents;
            if (d.own_record) {
                ++own;
                CHECK(d.doc_id == rec.subject_nct_id);
            } else {
                CHECK(d.date < rec.cutoff);
                CHECK(d.doc_id != rec.subject_nct_id);
            }
        }
    }
    CHECK(documents > own);
    CHECK(own >= 2);
}
