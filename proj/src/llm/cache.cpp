#include "autoct/llm/backend.hpp"

#include "autoct/common/text.hpp"

#include <algorithm>
#include <filesystem>

namespace fs = std::filesystem;

namespace autoct {

CachingBackend::CachingBackend(std::shared_ptr<LlmBackend> inner, std::string dir, CacheMode mode)
    : inner_(std::move(inner)), dir_(std::move(dir)), mode_(mode) {}

std::string CachingBackend::entry_path(const std::string& key) const {
    return dir_ + "/" + key.substr(0, 2) + "/" + key + ".json";
}

std::optional<std::string> CachingBackend::lookup(const ChatRequest& request) const {
    const std::string path = entry_path(cache_key(request));
    if (!fs::exists(path)) return std::nullopt;
    const auto entry = nlohmann::json::parse(read_file(path));
    return entry.at("response").get<std::string>();
}

std::string CachingBackend::complete(const ChatRequest& request) {
    const std::string key = cache_key(request);
    const std::string path = entry_path(key);
    if (fs::exists(path)) {
        ++hits_;
        return nlohmann::json::parse(read_file(path)).at("response").get<std::string>();
    }
    ++misses_;
    if (mode_ == CacheMode::ReplayOnly || !inner_) throw CacheMiss(key);
    std::string response = inner_->complete(request);
    fs::create_directories(fs::path(path).parent_path());
    const nlohmann::json entry = {{"key", key}, {"request", to_json(request)}, {"response", response}};
    write_file_atomic(path, entry.dump(2) + "\n");
    return response;
}

CacheCheck verify_cache(const std::string& dir) {
    CacheCheck out;
    if (!fs::exists(dir)) return out;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        ++out.entries;
        try {
            const auto entry = nlohmann::json::parse(read_file(p.string()));
            const std::string key = cache_key(request_from_json(entry.at("request")));
            (void)entry.at("response").get<std::string>();
            if (p.stem().string() != key) {
                out.problems.push_back(p.string() + ": content hashes to " + key);
            } else if (p.parent_path().filename().string() != key.substr(0, 2)) {
                out.problems.push_back(p.string() + ": stored under the wrong prefix directory");
            }
        } catch (const std::exception& e) {
            out.problems.push_back(p.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace autoct
