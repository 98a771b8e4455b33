#pragma once

#include "autoct/llm/backend.hpp"
#include "autoct/pipeline/config.hpp"
#include "autoct/retrieval/index.hpp"
#include "autoct/search/mcts.hpp"

#include <functional>
#include <memory>
#include <string>

namespace autoct {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;

struct RunOptions {
    /// Replaces the network backend behind the cache (live mode only).
    std::shared_ptr<LlmBackend> network;
    /// Called after initialization and after every rollout.
    std::function<void(const SearchTree&, int)> on_checkpoint;
};

struct RunOutcome {
    std::string run_dir;
    SearchStatus status = SearchStatus::Completed;
    int exit_code = kExitOk;
    std::string message;
    int rollouts_done = 0;
    std::size_t llm_requests = 0;
    std::size_t cache_hits = 0;
    std::size_t network_attempts = 0;
    std::size_t tool_calls = 0;
    std::size_t cutoff_violations = 0;
    std::size_t test_isolation_violations = 0;
};

/// Validates the config, creates config.output_dir and runs the whole
/// method, then writes the report. Throws ConfigError before creating
/// anything when the config is unusable.
RunOutcome run_pipeline(const RunConfig& config, const RunOptions& options = {});

/// Continues the run in `run_dir` from its last checkpoint, using the
/// config stored there.
RunOutcome resume_pipeline(const std::string& run_dir, const RunOptions& options = {});

/// Opens a saved retrieval index with the embedder named in its metadata.
RetrievalIndex open_index(const std::string& dir);

}  // namespace autoct
