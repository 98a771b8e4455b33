#include "autoct/pipeline/run.hpp"

#include "autoct/agents/agents.hpp"
#include "autoct/common/rng.hpp"
#include "autoct/common/text.hpp"
#include "autoct/domain/dataset.hpp"
#include "autoct/llm/http_backend.hpp"
#include "autoct/pipeline/context.hpp"
#include "autoct/pipeline/report.hpp"
#include "autoct/pipeline/run_dir.hpp"
#include "autoct/pipeline/sampling.hpp"
#include "autoct/retrieval/embedder.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace autoct {

namespace fs = std::filesystem;
using nlohmann::json;

RetrievalIndex open_index(const std::string& dir) {
    json meta;
    try {
        meta = json::parse(read_file(dir + "/meta.json"));
    } catch (const std::exception& e) {
        throw ConfigError("cannot read index metadata in " + dir + ": " + e.what());
    }
    const std::string id = meta.value("embedder", "");
    const auto dim = meta.value("dimension", std::size_t{0});
    std::shared_ptr<const Embedder> embedder;
    if (id.rfind("hashing-", 0) == 0) {
        embedder = std::make_shared<HashingEmbedder>(dim);
    } else if (id.rfind("remote:", 0) == 0) {
        embedder = std::make_shared<RemoteEmbedder>(RemoteEmbedder::from_env(id.substr(7), dim));
    } else {
        throw ConfigError("index " + dir + " uses unknown embedder '" + id + "'");
    }
    try {
        return RetrievalIndex::load(dir, embedder);
    } catch (const std::exception& e) {
        throw ConfigError("cannot load index " + dir + ": " + e.what());
    }
}

namespace {

class CountingBackend final : public LlmBackend {
public:
    explicit CountingBackend(std::shared_ptr<LlmBackend> inner) : inner_(std::move(inner)) {}
    std::string complete(const ChatRequest& request) override {
        ++count_;
        return inner_->complete(request);
    }
    [[nodiscard]] std::size_t count() const { return count_.load(); }

private:
    std::shared_ptr<LlmBackend> inner_;
    std::atomic<std::size_t> count_{0};
};

struct Audit {
    ToolAudit tools;
    std::set<std::string> test_ids;
    std::atomic<bool> sealed{true};
};

struct Environment {
    RetrievalIndex pubmed;
    RetrievalIndex trials;
    std::shared_ptr<NetworkGuard> guard;
    std::shared_ptr<CachingBackend> cache;
    std::shared_ptr<CountingBackend> backend;
};

Environment open_environment(const RunConfig& config, const RunOptions& options) {
    Environment env{open_index(config.pubmed_index), open_index(config.trials_index), nullptr, nullptr, nullptr};
    std::shared_ptr<LlmBackend> network;
    if (config.llm.mode == LlmMode::Replay) {
        env.guard = std::make_shared<NetworkGuard>();
        network = env.guard;
    } else if (options.network) {
        network = options.network;
    } else {
        try {
            network = HttpBackend::from_env();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("cannot configure the LLM endpoint: ") + e.what());
        }
    }
    std::shared_ptr<LlmBackend> front = network;
    if (!config.llm.cache_dir.empty()) {
        env.cache = std::make_shared<CachingBackend>(network, config.llm.cache_dir, CacheMode::ReadWrite);
        front = env.cache;
    }
    env.backend = std::make_shared<CountingBackend>(front);
    return env;
}

Samples draw_samples(const RunConfig& c) {
    const auto seed = c.search.seed;
    Samples s{stratified_sample(load_trials_csv(c.train_csv), c.sampling.train_size, mix_seed(seed, "sample:train")),
              stratified_sample(load_trials_csv(c.valid_csv), c.sampling.valid_size, mix_seed(seed, "sample:valid")),
              stratified_sample(load_trials_csv(c.test_csv), c.sampling.test_size, mix_seed(seed, "sample:test"))};
    std::set<std::string> seen;
    for (const auto* split : {&s.train, &s.valid, &s.test}) {
        for (const auto& t : *split) {
            if (!seen.insert(t.nct_id).second) throw ConfigError("trial " + t.nct_id + " appears in more than one split");
        }
    }
    return s;
}

void write_samples(const RunPaths& paths, const Samples& s) {
    const std::pair<const char*, const std::vector<TrialRecord>*> splits[] = {
        {"train", &s.train}, {"valid", &s.valid}, {"test", &s.test}};
    for (const auto& [name, trials] : splits) {
        std::ostringstream out;
        write_trials_csv(out, *trials);
        write_file_atomic(paths.samples(name), out.str());
    }
}

Samples read_samples(const RunPaths& paths) {
    try {
        return {load_trials_csv(paths.samples("train")), load_trials_csv(paths.samples("valid")),
                load_trials_csv(paths.samples("test"))};
    } catch (const std::exception& e) {
        throw CorruptRun(std::string("cannot read samples: ") + e.what());
    }
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunOutcome execute(const RunConfig& config, const RunPaths& paths, Environment& env, Samples samples,
                   const RunOptions& options, bool resuming) {
    const auto started = std::chrono::steady_clock::now();
    const std::string started_at = utc_now();
    RunLock lock(paths.root);

    Audit audit;
    for (const auto& t : samples.test) audit.test_ids.insert(t.nct_id);
    ToolContext tools;
    tools.pubmed = &env.pubmed;
    tools.trials = &env.trials;
    tools.observer = [&audit](const ToolCallRecord& rec) {
        ++audit.tools.calls;
        if (audit.sealed && audit.test_ids.contains(rec.subject_nct_id)) ++audit.tools.test_subjects;
        for (const auto& d : rec.documents) {
            ++audit.tools.documents;
            if (d.own_record) {
                ++audit.tools.own_records;
                if (d.doc_id != rec.subject_nct_id) ++audit.tools.cutoff_violations;
            } else if (!(d.date < rec.cutoff)) {
                ++audit.tools.cutoff_violations;
            }
        }
    };
    AgentSettings settings;
    settings.model_id = config.llm.model_id;
    settings.temperature = config.llm.temperature;
    settings.max_retries = config.llm.max_retries;
    settings.react_max_steps = config.llm.react_max_steps;
    settings.max_group_size = config.llm.max_group_size;
    settings.build_workers = config.llm.build_workers;
    settings.max_suggestions = static_cast<std::size_t>(config.search.max_suggestions);
    const Agents agents({env.backend, std::make_shared<PromptLibrary>(AUTOCT_DEFAULT_PROMPTS_DIR), tools}, settings,
                        TaskSpec{config.task, config.metric});

    FeatureStore store(agents, paths.values_dir());
    store.load();
    PipelineContext ctx(config, paths, agents, store, samples);
    ctx.on_checkpoint = options.on_checkpoint;

    RunOutcome out;
    out.run_dir = paths.root;
    auto fill_counters = [&] {
        out.llm_requests = env.backend->count();
        out.cache_hits = env.cache ? env.cache->hits() : 0;
        out.network_attempts = env.guard ? env.guard->attempts() : 0;
        out.tool_calls = audit.tools.calls;
        out.cutoff_violations = audit.tools.cutoff_violations;
        out.test_isolation_violations = audit.tools.test_subjects;
    };
    auto write_stats = [&] {
        fill_counters();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json stats = {{"started_at", started_at},
                      {"finished_at", utc_now()},
                      {"wall_seconds", seconds},
                      {"resumed", resuming},
                      {"status", std::string(to_string(out.status))},
                      {"rollouts_done", out.rollouts_done},
                      {"llm_requests", out.llm_requests},
                      {"cache_hits", out.cache_hits},
                      {"network_attempts", out.network_attempts},
                      {"tool_calls", out.tool_calls},
                      {"tool_documents", audit.tools.documents.load()},
                      {"own_record_lookups", audit.tools.own_records.load()},
                      {"cutoff_violations", out.cutoff_violations},
                      {"test_isolation_violations", out.test_isolation_violations}};
        if (!out.message.empty()) stats["message"] = out.message;
        write_file_atomic(paths.stats(), stats.dump(2) + "\n");
    };

    std::optional<SearchResult> result;
    try {
        if (resuming && fs::exists(paths.tree())) {
            auto loaded = load_tree(paths.root);
            const int done = loaded.document.value("rollouts_done", 0);
            spdlog::info("resuming after {} rollouts", done);
            result = resume_search(config.search, ctx, std::move(loaded.tree), done);
        } else {
            result = run_search(config.search, ctx);
        }
    } catch (const BackendFailure& e) {
        spdlog::error("backend failure during initialization: {}", e.what());
        out.status = SearchStatus::Failed;
        out.exit_code = kExitBackend;
        out.message = e.what();
        write_stats();
        return out;
    } catch (const CorruptCheckpoint& e) {
        throw CorruptRun(e.what());
    }

    out.status = result->status;
    out.rollouts_done = result->rollouts_done;
    out.message = result->failure;
    const SearchTree& tree = result->tree;

    audit.sealed = false;
    ctx.unseal_test();
    try {
        ctx.build_test_features(tree.plans(tree.best()));
    } catch (const BackendFailure& e) {
        spdlog::error("backend failure while building test features: {}", e.what());
        out.status = SearchStatus::Failed;
        out.message = e.what();
    }
    save_tree(tree, paths.root, checkpoint_extra(out.rollouts_done, to_string(out.status)));
    write_report(paths.root, build_report(paths.root));
    out.exit_code = out.status == SearchStatus::Failed ? kExitBackend : kExitOk;
    write_stats();
    spdlog::info("best node {} with validation {} {:.4f}", tree.best(), to_string(config.metric), tree.best_score());
    return out;
}

}  // namespace

RunOutcome run_pipeline(const RunConfig& config, const RunOptions& options) {
    validate_inputs(config);
    Samples samples = draw_samples(config);
    Environment env = open_environment(config, options);
    const RunPaths paths{config.output_dir};
    if (fs::exists(paths.root) && !fs::is_empty(paths.root)) {
        throw ConfigError("output directory " + paths.root + " already exists and is not empty; use --resume");
    }
    create_run_dir(paths);
    write_file_atomic(paths.config(), render_config(config));
    write_samples(paths, samples);
    return execute(config, paths, env, std::move(samples), options, false);
}

RunOutcome resume_pipeline(const std::string& run_dir, const RunOptions& options) {
    const RunPaths paths{fs::absolute(run_dir).lexically_normal().string()};
    check_run_dir(paths);
    RunConfig config = load_config(paths.config());
    config.output_dir = paths.root;
    validate_inputs(config);
    Samples samples = read_samples(paths);
    Environment env = open_environment(config, options);
    return execute(config, paths, env, std::move(samples), options, true);
}

}  // namespace autoct
