#include "autoct/retrieval/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace autoct {

namespace {

void require_k(std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
}

bool ranks_before(const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

std::vector<Hit> top_k(std::vector<Hit> hits, std::size_t k) {
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(k), hits.end(), ranks_before);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), ranks_before);
    }
    return hits;
}

}  // namespace

double bm25_idf(std::size_t n_docs, std::size_t df) {
    const double n = static_cast<double>(n_docs);
    const double f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

double bm25_term_score(double tf, double doc_len, double avgdl, double idf, const Bm25Params& params) {
    const double norm = avgdl > 0.0 ? doc_len / avgdl : 0.0;
    return idf * (tf * (params.k1 + 1.0)) / (tf + params.k1 * (1.0 - params.b + params.b * norm));
}

std::vector<Hit> bm25_search(const RetrievalIndex& index, std::string_view query, std::size_t k, Date cutoff,
                             const Bm25Params& params) {
    require_k(k);
    // Distinct terms in first-appearance order keep the summation order fixed.
    std::vector<std::string> terms;
    std::unordered_set<std::string> seen;
    for (auto& t : tokenize(query)) {
        if (seen.insert(t).second) terms.push_back(std::move(t));
    }
    std::unordered_map<std::uint32_t, double> scores;
    std::vector<std::uint32_t> order;
    for (const auto& term : terms) {
        const auto& postings = index.postings(term);
        if (postings.empty()) continue;
        const double idf = bm25_idf(index.size(), postings.size());
        for (const auto& p : postings) {
            if (!(index.document(p.doc).date < cutoff)) continue;
            const double s = bm25_term_score(p.tf, index.doc_length(p.doc), index.avg_doc_length(), idf, params);
            auto [it, inserted] = scores.emplace(p.doc, 0.0);
            if (inserted) order.push_back(p.doc);
            it->second += s;
        }
    }
    std::vector<Hit> hits;
    for (auto doc : order) {
        const double s = scores[doc];
        if (s > 0.0) hits.push_back(Hit{index.document(doc).doc_id, s});
    }
    return top_k(std::move(hits), k);
}

std::vector<Hit> vector_search(const RetrievalIndex& index, std::string_view query, std::size_t k, Date cutoff) {
    require_k(k);
    if (index.size() == 0) return {};
    const auto q = index.embedder().embed(query);
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& doc = index.document(i);
        if (!(doc.date < cutoff)) continue;
        const double c = dot(q, index.embedding(i));
        if (c > 0.0) hits.push_back(Hit{doc.doc_id, c});
    }
    return top_k(std::move(hits), k);
}

std::vector<Hit> hybrid_search(const RetrievalIndex& index, std::string_view query, std::size_t k, Date cutoff) {
    require_k(k);
    const auto lexical = bm25_search(index, query, 2 * k, cutoff);
    const auto semantic = vector_search(index, query, 2 * k, cutoff);
    std::unordered_map<std::string, double> fused;
    std::vector<std::string> order;
    for (const auto* list : {&lexical, &semantic}) {
        for (std::size_t r = 0; r < list->size(); ++r) {
            const auto& id = (*list)[r].doc_id;
            auto [it, inserted] = fused.emplace(id, 0.0);
            if (inserted) order.push_back(id);
            it->second += 1.0 / (kRrfConstant + static_cast<double>(r + 1));
        }
    }
    std::vector<Hit> hits;
    hits.reserve(order.size());
    for (const auto& id : order) hits.push_back(Hit{id, fused[id]});
    return top_k(std::move(hits), k);
}

std::vector<Hit> nct_exclusion_search(const RetrievalIndex& index, std::string_view query, std::size_t k,
                                      Date subject_trial_start) {
    if (!index.all_nct()) throw std::invalid_argument("related-trial search requires a trial-only index");
    return hybrid_search(index, query, k, subject_trial_start);
}

}  // namespace autoct
