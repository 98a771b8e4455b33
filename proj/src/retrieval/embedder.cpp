#include "autoct/retrieval/embedder.hpp"

#include "autoct/common/hash.hpp"
#include "autoct/common/http.hpp"
#include "autoct/retrieval/document.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace autoct {

std::vector<std::vector<double>> Embedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

void normalize(std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::string HashingEmbedder::id() const { return "hashing-" + std::to_string(dimension_); }

std::vector<double> HashingEmbedder::embed(std::string_view text) const {
    std::vector<double> v(dimension_, 0.0);
    for (const auto& token : tokenize(text)) {
        const std::uint64_t h = fnv1a64(token);
        const double sign = ((h >> 32) & 1U) != 0 ? -1.0 : 1.0;
        v[h % dimension_] += sign;
    }
    normalize(v);
    return v;
}

RemoteEmbedder::RemoteEmbedder(std::string base_url, std::string api_key, std::string model, std::size_t dimension)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)), dimension_(dimension) {}

RemoteEmbedder RemoteEmbedder::from_env(std::string model, std::size_t dimension) {
    auto env = [](const char* primary, const char* fallback) -> std::string {
        if (const char* v = std::getenv(primary)) return v;
        if (const char* v = std::getenv(fallback)) return v;
        return {};
    };
    std::string url = env("AUTOCT_EMBED_URL", "AUTOCT_LLM_URL");
    if (url.empty()) throw std::runtime_error("AUTOCT_EMBED_URL (or AUTOCT_LLM_URL) is not set");
    return RemoteEmbedder(std::move(url), env("AUTOCT_EMBED_KEY", "AUTOCT_LLM_KEY"), std::move(model), dimension);
}

std::vector<double> RemoteEmbedder::embed(std::string_view text) const {
    return embed_batch({std::string(text)}).front();
}

std::vector<std::vector<double>> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    constexpr std::size_t kBatch = 64;
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += kBatch) {
        const std::size_t end = std::min(texts.size(), start + kBatch);
        nlohmann::json body = {{"model", model_},
                               {"input", std::vector<std::string>(texts.begin() + static_cast<long>(start),
                                                                  texts.begin() + static_cast<long>(end))}};
        const nlohmann::json res = post_json(base_url_, "/embeddings", api_key_, body);
        const auto& data = res.at("data");
        if (data.size() != end - start) throw std::runtime_error("embeddings response has the wrong length");
        std::vector<std::vector<double>> chunk(end - start);
        for (std::size_t pos = 0; pos < data.size(); ++pos) {
            const auto& item = data[pos];
            const std::size_t idx = item.value("index", pos);
            if (idx >= chunk.size()) throw std::runtime_error("embeddings response index out of range");
            auto v = item.at("embedding").get<std::vector<double>>();
            if (v.size() != dimension_) {
                throw std::runtime_error("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                                         std::to_string(dimension_));
            }
            normalize(v);
            chunk[idx] = std::move(v);
        }
        for (auto& v : chunk) out.push_back(std::move(v));
    }
    return out;
}

}  // namespace autoct
