#pragma once

#include "autoct/retrieval/index.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace autoct {

struct Hit {
    std::string doc_id;
    double score = 0.0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

inline constexpr double kRrfConstant = 60.0;

double bm25_idf(std::size_t n_docs, std::size_t df);
/// Contribution of one query term to one document's score.
double bm25_term_score(double tf, double doc_len, double avgdl, double idf, const Bm25Params& params = {});

/// All searches return at most k hits dated strictly before `cutoff`, sorted by
/// descending score with ties broken by ascending doc_id. Zero-score documents
/// are never returned. k must be at least 1.
std::vector<Hit> bm25_search(const RetrievalIndex& index, std::string_view query, std::size_t k, Date cutoff,
                             const Bm25Params& params = {});
std::vector<Hit> vector_search(const RetrievalIndex& index, std::string_view query, std::size_t k, Date cutoff);
/// Reciprocal Rank Fusion of the top-2k lexical and vector lists.
std::vector<Hit> hybrid_search(const RetrievalIndex& index, std::string_view query, std::size_t k, Date cutoff);
/// Related-trial lookup: hybrid search over a trial-only index, restricted to
/// trials that started strictly before the subject trial.
std::vector<Hit> nct_exclusion_search(const RetrievalIndex& index, std::string_view query, std::size_t k,
                                      Date subject_trial_start);

}  // namespace autoct
