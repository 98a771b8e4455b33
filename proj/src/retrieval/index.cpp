#include "autoct/retrieval/index.hpp"

#include "autoct/common/text.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace autoct {

namespace {

constexpr int kFormatVersion = 1;

const std::vector<Posting>& empty_postings() {
    static const std::vector<Posting> empty;
    return empty;
}

}  // namespace

RetrievalIndex RetrievalIndex::build(std::vector<Document> docs, std::shared_ptr<const Embedder> embedder) {
    if (!embedder) throw std::invalid_argument("index requires an embedder");
    RetrievalIndex idx;
    idx.embedder_ = std::move(embedder);
    idx.docs_ = std::move(docs);
    for (std::size_t i = 0; i < idx.docs_.size(); ++i) {
        if (!idx.by_id_.emplace(idx.docs_[i].doc_id, i).second) throw DuplicateDocId(idx.docs_[i].doc_id);
    }
    idx.build_lexical();
    std::vector<std::string> texts;
    texts.reserve(idx.docs_.size());
    for (const auto& d : idx.docs_) texts.push_back(d.text());
    idx.embeddings_ = idx.embedder_->embed_batch(texts);
    for (const auto& e : idx.embeddings_) {
        if (e.size() != idx.embedder_->dimension()) throw std::runtime_error("embedder returned wrong dimension");
    }
    return idx;
}

void RetrievalIndex::build_lexical() {
    postings_.clear();
    lengths_.assign(docs_.size(), 0);
    all_nct_ = true;
    double total = 0.0;
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        if (docs_[i].source != Source::Nct) all_nct_ = false;
        std::unordered_map<std::string, std::uint32_t> tf;
        const auto tokens = tokenize(docs_[i].text());
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            postings_[term].push_back(Posting{static_cast<std::uint32_t>(i), count});
        }
        lengths_[i] = static_cast<std::uint32_t>(tokens.size());
        total += static_cast<double>(tokens.size());
    }
    avgdl_ = docs_.empty() ? 0.0 : total / static_cast<double>(docs_.size());
}

std::optional<std::size_t> RetrievalIndex::find(const std::string& doc_id) const {
    auto it = by_id_.find(doc_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> RetrievalIndex::find_trial(const std::string& nct_id) const {
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        const auto& d = docs_[i];
        if (d.source != Source::Nct) continue;
        if (d.nct_id ? *d.nct_id == nct_id : d.doc_id == nct_id) return i;
    }
    return std::nullopt;
}

const std::vector<Posting>& RetrievalIndex::postings(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? empty_postings() : it->second;
}

void RetrievalIndex::save(const std::string& dir) const {
    static_assert(std::endian::native == std::endian::little, "index files store little-endian doubles");
    std::filesystem::create_directories(dir);
    const std::size_t d = embedder_->dimension();
    nlohmann::json meta = {{"format_version", kFormatVersion},
                           {"embedder", embedder_->id()},
                           {"dimension", d},
                           {"count", docs_.size()}};
    std::ostringstream docs;
    write_corpus_jsonl(docs, docs_);
    std::string bin(docs_.size() * d * sizeof(double), '\0');
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        std::memcpy(bin.data() + i * d * sizeof(double), embeddings_[i].data(), d * sizeof(double));
    }
    write_file_atomic(dir + "/documents.jsonl", docs.str());
    write_file_atomic(dir + "/embeddings.bin", bin);
    write_file_atomic(dir + "/meta.json", meta.dump(2) + "\n");
}

RetrievalIndex RetrievalIndex::load(const std::string& dir, std::shared_ptr<const Embedder> embedder) {
    if (!embedder) throw std::invalid_argument("index requires an embedder");
    const auto meta = nlohmann::json::parse(read_file(dir + "/meta.json"));
    if (meta.at("format_version").get<int>() > kFormatVersion) {
        throw Error("index " + dir + " has a newer format version");
    }
    if (meta.at("embedder").get<std::string>() != embedder->id() ||
        meta.at("dimension").get<std::size_t>() != embedder->dimension()) {
        throw Error("index " + dir + " was built with embedder " + meta.at("embedder").get<std::string>() +
                    ", not " + embedder->id());
    }
    std::istringstream docs_in(read_file(dir + "/documents.jsonl"));
    RetrievalIndex idx;
    idx.embedder_ = std::move(embedder);
    idx.docs_ = read_corpus_jsonl(docs_in);
    const std::size_t n = meta.at("count").get<std::size_t>();
    if (idx.docs_.size() != n) throw Error("index " + dir + ": document count does not match meta.json");
    for (std::size_t i = 0; i < n; ++i) {
        if (!idx.by_id_.emplace(idx.docs_[i].doc_id, i).second) throw DuplicateDocId(idx.docs_[i].doc_id);
    }
    const std::size_t d = idx.embedder_->dimension();
    const std::string bin = read_file(dir + "/embeddings.bin");
    if (bin.size() != n * d * sizeof(double)) throw Error("index " + dir + ": embeddings.bin has the wrong size");
    idx.embeddings_.assign(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(idx.embeddings_[i].data(), bin.data() + i * d * sizeof(double), d * sizeof(double));
    }
    idx.build_lexical();
    return idx;
}

}  // namespace autoct
