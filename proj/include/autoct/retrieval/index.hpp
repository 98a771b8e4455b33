#pragma once

#include "autoct/retrieval/document.hpp"
#include "autoct/retrieval/embedder.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace autoct {

struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;
};

/// Immutable lexical + vector index over one corpus. Safe for concurrent reads.
class RetrievalIndex {
public:
    /// Throws DuplicateDocId.
    static RetrievalIndex build(std::vector<Document> docs, std::shared_ptr<const Embedder> embedder);

    /// Writes meta.json, documents.jsonl and embeddings.bin into `dir`.
    void save(const std::string& dir) const;
    /// The embedder must have the id and dimension recorded at save time.
    static RetrievalIndex load(const std::string& dir, std::shared_ptr<const Embedder> embedder);

    [[nodiscard]] std::size_t size() const { return docs_.size(); }
    [[nodiscard]] const Document& document(std::size_t i) const { return docs_[i]; }
    [[nodiscard]] std::optional<std::size_t> find(const std::string& doc_id) const;
    /// First document whose nct_id (or doc_id, for trial records without one) matches.
    [[nodiscard]] std::optional<std::size_t> find_trial(const std::string& nct_id) const;

    [[nodiscard]] double avg_doc_length() const { return avgdl_; }
    [[nodiscard]] std::uint32_t doc_length(std::size_t i) const { return lengths_[i]; }
    [[nodiscard]] const std::vector<Posting>& postings(const std::string& term) const;
    [[nodiscard]] std::size_t document_frequency(const std::string& term) const { return postings(term).size(); }

    [[nodiscard]] const std::vector<double>& embedding(std::size_t i) const { return embeddings_[i]; }
    [[nodiscard]] const Embedder& embedder() const { return *embedder_; }
    [[nodiscard]] bool all_nct() const { return all_nct_; }

private:
    RetrievalIndex() = default;
    void build_lexical();

    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::vector<std::uint32_t> lengths_;
    double avgdl_ = 0.0;
    std::vector<std::vector<double>> embeddings_;
    std::shared_ptr<const Embedder> embedder_;
    bool all_nct_ = true;
};

}  // namespace autoct
