#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace autoct {

/// Maps text to a unit-norm vector of fixed dimension. Implementations must
/// be deterministic and safe to call from several threads.
class Embedder {
public:
    virtual ~Embedder() = default;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
    /// Stable identifier recorded in saved indices, e.g. "hashing-256".
    [[nodiscard]] virtual std::string id() const = 0;
    [[nodiscard]] virtual std::vector<double> embed(std::string_view text) const = 0;
    [[nodiscard]] virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) const;
};

/// Signed feature hashing of token unigrams, L2-normalized. Text without any
/// token embeds to the zero vector, which has cosine 0 with everything.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 256);
    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    [[nodiscard]] std::string id() const override;
    [[nodiscard]] std::vector<double> embed(std::string_view text) const override;

private:
    std::size_t dimension_;
};

/// Client for an OpenAI-compatible /embeddings endpoint. Returned vectors are
/// renormalized to unit length.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(std::string base_url, std::string api_key, std::string model, std::size_t dimension);
    /// Reads AUTOCT_EMBED_URL (falling back to AUTOCT_LLM_URL) and
    /// AUTOCT_EMBED_KEY (falling back to AUTOCT_LLM_KEY).
    static RemoteEmbedder from_env(std::string model, std::size_t dimension);

    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    [[nodiscard]] std::string id() const override { return "remote:" + model_; }
    [[nodiscard]] std::vector<double> embed(std::string_view text) const override;
    [[nodiscard]] std::vector<std::vector<double>> embed_batch(
        const std::vector<std::string>& texts) const override;

private:
    std::string base_url_;
    std::string api_key_;
    std::string model_;
    std::size_t dimension_;
};

/// Scales v to unit length in place; leaves the zero vector unchanged.
void normalize(std::vector<double>& v);
double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace autoct
