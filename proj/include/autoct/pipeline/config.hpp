#pragma once

#include "autoct/domain/errors.hpp"
#include "autoct/domain/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace autoct {

/// Invalid or incomplete configuration. Raised before any model call.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class LlmMode {
    /// Cache in front of the HTTP endpoint; misses go to the network.
    Live,
    /// Cache only; a miss reaches a guard that fails the call.
    Replay,
};

struct LlmConfig {
    LlmMode mode = LlmMode::Live;
    std::string model_id = "gpt-4o-mini";
    double temperature = 0.0;
    std::string cache_dir;
    int max_retries = 2;
    int react_max_steps = 8;
    std::size_t max_group_size = 4;
    std::size_t build_workers = 4;
};

struct SamplingConfig {
    std::size_t train_size = 100;
    std::size_t valid_size = 100;
    std::size_t test_size = 100;
};

struct RunConfig {
    std::string task;
    Metric metric = Metric::RocAuc;
    std::string train_csv;
    std::string valid_csv;
    std::string test_csv;
    std::string pubmed_index;
    std::string trials_index;
    std::string output_dir;
    SamplingConfig sampling;
    SearchConfig search;
    LlmConfig llm;
};

/// Parses the INI text. Relative paths are resolved against `base_dir`.
/// Unknown sections or keys and malformed values raise ConfigError.
RunConfig parse_config(std::string_view text, const std::string& base_dir);
RunConfig load_config(const std::string& path);

/// Checks that every input path exists and the sample sizes fit the datasets.
void validate_inputs(const RunConfig& config);

/// Canonical INI text with absolute paths; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& config);

}  // namespace autoct
