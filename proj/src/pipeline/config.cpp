#include "autoct/pipeline/config.hpp"

#include "autoct/common/text.hpp"
#include "autoct/domain/dataset.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

namespace autoct {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"data", {"task", "metric", "train", "valid", "test", "pubmed_index", "trials_index", "output_dir"}},
        {"sampling", {"train_size", "valid_size", "test_size", "seed"}},
        {"search",
         {"rollouts", "max_depth", "exploration_weight", "n_factor_pos", "n_factor_neg", "n_error_examples",
          "max_suggestions", "stop_at_score"}},
        {"llm",
         {"mode", "model", "temperature", "cache_dir", "max_retries", "react_max_steps", "max_group_size",
          "build_workers"}},
    };
    return keys;
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::string base) : tree_(tree), base_(std::move(base)) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return trim(*v);
    }

    std::string text(const std::string& section, const std::string& key, std::string fallback) const {
        return raw(section, key).value_or(std::move(fallback));
    }

    std::string required(const std::string& section, const std::string& key) const {
        auto v = raw(section, key);
        if (!v || v->empty()) throw ConfigError("missing [" + section + "] " + key);
        return *v;
    }

    std::string path(const std::string& section, const std::string& key, bool required_key = true) const {
        auto v = required_key ? std::optional(required(section, key)) : raw(section, key);
        if (!v || v->empty()) return {};
        fs::path p(*v);
        if (p.is_relative()) p = fs::path(base_) / p;
        return fs::absolute(p).lexically_normal().string();
    }

    template <typename T>
    T number(const std::string& section, const std::string& key, T fallback, T min_value) const {
        auto v = raw(section, key);
        if (!v) return fallback;
        if constexpr (std::is_unsigned_v<T>) {
            if (!v->empty() && (*v)[0] == '-') {
                throw ConfigError("[" + section + "] " + key + " has an invalid value '" + *v + "'");
            }
        }
        T out{};
        std::istringstream in(*v);
        in >> out;
        if (!in || !in.eof() || out < min_value) {
            throw ConfigError("[" + section + "] " + key + " has an invalid value '" + *v + "'");
        }
        return out;
    }

private:
    const pt::ptree& tree_;
    std::string base_;
};

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config is not valid INI: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
        if (!body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
        }
    }

    const Reader r(tree, base_dir);
    RunConfig c;
    c.task = r.required("data", "task");
    const std::string metric = r.text("data", "metric", "roc_auc");
    auto m = parse_metric(metric);
    if (!m) throw ConfigError("unknown metric '" + metric + "'");
    c.metric = *m;
    c.train_csv = r.path("data", "train");
    c.valid_csv = r.path("data", "valid");
    c.test_csv = r.path("data", "test");
    c.pubmed_index = r.path("data", "pubmed_index");
    c.trials_index = r.path("data", "trials_index");
    c.output_dir = r.path("data", "output_dir");

    c.sampling.train_size = r.number<std::size_t>("sampling", "train_size", 100, 1);
    c.sampling.valid_size = r.number<std::size_t>("sampling", "valid_size", 100, 1);
    c.sampling.test_size = r.number<std::size_t>("sampling", "test_size", 100, 1);
    c.search.seed = r.number<std::uint64_t>("sampling", "seed", 0, 0);

    c.search.rollouts = r.number<int>("search", "rollouts", 10, 0);
    c.search.max_depth = r.number<int>("search", "max_depth", 10, 1);
    c.search.exploration_weight = r.number<double>("search", "exploration_weight", 1.0, 0.0);
    c.search.n_factor_pos = r.number<int>("search", "n_factor_pos", 3, 0);
    c.search.n_factor_neg = r.number<int>("search", "n_factor_neg", 3, 0);
    c.search.n_error_examples = r.number<int>("search", "n_error_examples", 3, 0);
    c.search.max_suggestions = r.number<int>("search", "max_suggestions", 6, 1);
    if (auto v = r.raw("search", "stop_at_score"); v && !v->empty()) {
        c.search.stop_at_score = r.number<double>("search", "stop_at_score", 0.0, 0.0);
    }

    const std::string mode = to_lower(r.text("llm", "mode", "live"));
    if (mode == "live") {
        c.llm.mode = LlmMode::Live;
    } else if (mode == "replay") {
        c.llm.mode = LlmMode::Replay;
    } else {
        throw ConfigError("[llm] mode must be live or replay, got '" + mode + "'");
    }
    c.llm.model_id = r.text("llm", "model", "gpt-4o-mini");
    c.llm.temperature = r.number<double>("llm", "temperature", 0.0, 0.0);
    c.llm.cache_dir = r.path("llm", "cache_dir", false);
    c.llm.max_retries = r.number<int>("llm", "max_retries", 2, 0);
    c.llm.react_max_steps = r.number<int>("llm", "react_max_steps", 8, 1);
    c.llm.max_group_size = r.number<std::size_t>("llm", "max_group_size", 4, 1);
    c.llm.build_workers = r.number<std::size_t>("llm", "build_workers", 4, 1);
    if (c.llm.mode == LlmMode::Replay && c.llm.cache_dir.empty()) throw ConfigError("replay mode needs [llm] cache_dir");
    return c;
}

RunConfig load_config(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, fs::absolute(path).parent_path().string());
}

void validate_inputs(const RunConfig& c) {
    auto need = [](const std::string& p, const char* what, bool dir) {
        if (p.empty() || !fs::exists(p) || fs::is_directory(p) != dir) {
            throw ConfigError(std::string(what) + " not found: " + p);
        }
    };
    need(c.train_csv, "train CSV", false);
    need(c.valid_csv, "validation CSV", false);
    need(c.test_csv, "test CSV", false);
    need(c.pubmed_index, "PubMed index", true);
    need(c.trials_index, "trials index", true);
    if (c.llm.mode == LlmMode::Replay) need(c.llm.cache_dir, "LLM cache", true);
    auto fits = [](const std::string& path, std::size_t n, const char* what) {
        std::size_t have = 0;
        try {
            have = load_trials_csv(path).size();
        } catch (const std::exception& e) {
            throw ConfigError(std::string(what) + ": " + e.what());
        }
        if (n > have) {
            throw ConfigError(std::string(what) + " has " + std::to_string(have) + " trials, fewer than the sample size " +
                              std::to_string(n));
        }
    };
    fits(c.train_csv, c.sampling.train_size, "train CSV");
    fits(c.valid_csv, c.sampling.valid_size, "validation CSV");
    fits(c.test_csv, c.sampling.test_size, "test CSV");
}

std::string render_config(const RunConfig& c) {
    std::ostringstream o;
    o << "[data]\n"
      << "task = " << c.task << "\n"
      << "metric = " << to_string(c.metric) << "\n"
      << "train = " << c.train_csv << "\n"
      << "valid = " << c.valid_csv << "\n"
      << "test = " << c.test_csv << "\n"
      << "pubmed_index = " << c.pubmed_index << "\n"
      << "trials_index = " << c.trials_index << "\n"
      << "output_dir = " << c.output_dir << "\n\n"
      << "[sampling]\n"
      << "train_size = " << c.sampling.train_size << "\n"
      << "valid_size = " << c.sampling.valid_size << "\n"
      << "test_size = " << c.sampling.test_size << "\n"
      << "seed = " << c.search.seed << "\n\n"
      << "[search]\n"
      << "rollouts = " << c.search.rollouts << "\n"
      << "max_depth = " << c.search.max_depth << "\n"
      << "exploration_weight = " << format_exact(c.search.exploration_weight) << "\n"
      << "n_factor_pos = " << c.search.n_factor_pos << "\n"
      << "n_factor_neg = " << c.search.n_factor_neg << "\n"
      << "n_error_examples = " << c.search.n_error_examples << "\n"
      << "max_suggestions = " << c.search.max_suggestions << "\n";
    if (c.search.stop_at_score) o << "stop_at_score = " << format_exact(*c.search.stop_at_score) << "\n";
    o << "\n[llm]\n"
      << "mode = " << (c.llm.mode == LlmMode::Live ? "live" : "replay") << "\n"
      << "model = " << c.llm.model_id << "\n"
      << "temperature = " << format_exact(c.llm.temperature) << "\n";
    if (!c.llm.cache_dir.empty()) o << "cache_dir = " << c.llm.cache_dir << "\n";
    o << "max_retries = " << c.llm.max_retries << "\n"
      << "react_max_steps = " << c.llm.react_max_steps << "\n"
      << "max_group_size = " << c.llm.max_group_size << "\n"
      << "build_workers = " << c.llm.build_workers << "\n";
    return o.str();
}

}  // namespace autoct
