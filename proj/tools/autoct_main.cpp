#include "autoct/llm/backend.hpp"
#include "autoct/pipeline/config.hpp"
#include "autoct/pipeline/report.hpp"
#include "autoct/pipeline/run.hpp"
#include "autoct/pipeline/run_dir.hpp"
#include "autoct/retrieval/document.hpp"
#include "autoct/retrieval/embedder.hpp"
#include "autoct/retrieval/index.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

constexpr int kExitFailure = 1;

int ingest(const std::string& corpus, const std::string& out, const std::string& embedder_kind, std::size_t dim,
           const std::string& model) {
    auto docs = autoct::load_corpus_jsonl(corpus);
    std::shared_ptr<const autoct::Embedder> embedder;
    if (embedder_kind == "hashing") {
        embedder = std::make_shared<autoct::HashingEmbedder>(dim);
    } else {
        embedder = std::make_shared<autoct::RemoteEmbedder>(autoct::RemoteEmbedder::from_env(model, dim));
    }
    const std::size_t n = docs.size();
    autoct::RetrievalIndex::build(std::move(docs), embedder).save(out);
    fmt::print("indexed {} documents into {} ({})\n", n, out, embedder->id());
    return autoct::kExitOk;
}

int run(const std::string& config_path, const std::string& resume_dir) {
    const autoct::RunOutcome outcome = resume_dir.empty() ? autoct::run_pipeline(autoct::load_config(config_path))
                                                          : autoct::resume_pipeline(resume_dir);
    fmt::print("run directory: {}\nstatus: {} after {} rollout(s)\nllm requests: {} (cache hits {}, network attempts {})\n",
               outcome.run_dir, autoct::to_string(outcome.status), outcome.rollouts_done, outcome.llm_requests,
               outcome.cache_hits, outcome.network_attempts);
    if (!outcome.message.empty()) fmt::print("error: {}\n", outcome.message);
    return outcome.exit_code;
}

int report(const std::string& run_dir, const std::vector<std::string>& trials) {
    const auto rendered = autoct::build_report(run_dir, {trials});
    autoct::write_report(run_dir, rendered);
    std::cout << rendered.text;
    return autoct::kExitOk;
}

int verify(const std::string& dir) {
    const auto check = autoct::verify_cache(dir);
    fmt::print("{} cache entries\n", check.entries);
    for (const auto& p : check.problems) fmt::print("problem: {}\n", p);
    return check.problems.empty() ? autoct::kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automated feature search for clinical-trial outcome prediction"};
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

    auto* ingest_cmd = app.add_subcommand("ingest", "Index a JSONL corpus for retrieval");
    std::string corpus, out, embedder = "hashing", model = "text-embedding-3-small";
    std::size_t dim = 256;
    ingest_cmd->add_option("--corpus", corpus, "Corpus JSONL file")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--out", out, "Index directory to write")->required();
    ingest_cmd->add_option("--embedder", embedder, "hashing or remote")->check(CLI::IsMember({"hashing", "remote"}));
    ingest_cmd->add_option("--dim", dim, "Embedding dimension")->check(CLI::PositiveNumber);
    ingest_cmd->add_option("--model", model, "Remote embedding model");

    auto* run_cmd = app.add_subcommand("run", "Run the feature search");
    std::string config_path, resume_dir;
    run_cmd->add_option("--config", config_path, "Config file");
    run_cmd->add_option("--resume", resume_dir, "Continue the run in this directory")->check(CLI::ExistingDirectory);

    auto* report_cmd = app.add_subcommand("report", "Regenerate the report of a run");
    std::string run_dir;
    std::vector<std::string> trials;
    report_cmd->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    report_cmd->add_option("--trial", trials, "Test trial to chart (repeatable)");

    auto* cache_cmd = app.add_subcommand("cache", "LLM cache maintenance");
    cache_cmd->require_subcommand(1);
    auto* verify_cmd = cache_cmd->add_subcommand("verify", "Check every cache entry against its key");
    std::string cache_dir;
    verify_cmd->add_option("dir", cache_dir, "Cache directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? autoct::kExitOk : autoct::kExitConfig;
    }

    auto logger = spdlog::stderr_color_mt("autoct");
    spdlog::set_default_logger(logger);
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*ingest_cmd) return ingest(corpus, out, embedder, dim, model);
        if (*run_cmd) {
            if (config_path.empty() == resume_dir.empty()) {
                std::cerr << "error: run needs exactly one of --config or --resume\n";
                return autoct::kExitConfig;
            }
            return run(config_path, resume_dir);
        }
        if (*report_cmd) return report(run_dir, trials);
        if (*verify_cmd) return verify(cache_dir);
    } catch (const autoct::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return autoct::kExitConfig;
    } catch (const autoct::CorruptRun& e) {
        std::cerr << "corrupt run: " << e.what() << "\n";
        return autoct::kExitConfig;
    } catch (const autoct::RunLocked& e) {
        std::cerr << "error: " << e.what() << "\n";
        return autoct::kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return autoct::kExitConfig;
    } catch (const autoct::BackendFailure& e) {
        std::cerr << "backend failure: " << e.what() << "\n";
        return autoct::kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return autoct::kExitOk;
}
