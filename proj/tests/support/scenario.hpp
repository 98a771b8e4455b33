#pragma once

#include "autoct/domain/types.hpp"
#include "autoct/llm/backend.hpp"
#include "autoct/retrieval/document.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace autoct::testing {

/// The feature whose built value equals the trial label.
inline constexpr const char* kSeparatorFeature = "regulatory_precedent";

/// Synthetic trials and corpora for the planted-separator scenario.
struct ScenarioData {
    std::vector<TrialRecord> train;
    std::vector<TrialRecord> valid;
    std::vector<TrialRecord> test;
    std::vector<Document> pubmed;
    std::vector<Document> trials;
};

ScenarioData make_scenario(std::uint64_t seed, std::size_t n_train = 120, std::size_t n_valid = 110,
                           std::size_t n_test = 110);

/// Writes train.csv, valid.csv, test.csv and the pubmed/ and trials/ indices under `dir`.
void write_scenario(const ScenarioData& data, const std::string& dir);

struct ScenarioConfig {
    std::string data_dir;
    std::string cache_dir;
    std::string output_dir;
    std::string mode = "replay";
    int rollouts = 3;
    std::uint64_t seed = 7;
    std::size_t sample_size = 100;
};

std::string scenario_config_text(const ScenarioConfig& c);

/// Scripted model for the scenario. Initial features are noise; the
/// model-based evaluator always proposes adding the separator until it is
/// present, and the builder fills the separator with the trial label.
class ScenarioBackend final : public LlmBackend {
public:
    explicit ScenarioBackend(const ScenarioData& data);
    std::string complete(const ChatRequest& request) override;
    [[nodiscard]] std::size_t calls() const { return calls_.load(); }

private:
    std::map<std::string, int> labels_;
    std::atomic<std::size_t> calls_{0};
};

struct RecordedScenario {
    ScenarioData data;
    std::string data_dir;
    std::string cache_dir;
};

/// Writes the scenario under `root` and records its replay cache with one
/// live run of the scripted backend. `root` is wiped first.
RecordedScenario record_scenario(const std::string& root, std::uint64_t seed = 7, int rollouts = 3);

}  // namespace autoct::testing
