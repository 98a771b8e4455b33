#pragma once

#include "autoct/domain/types.hpp"
#include "autoct/llm/react.hpp"
#include "autoct/retrieval/search.hpp"

#include <functional>
#include <string>
#include <vector>

namespace autoct {

inline constexpr const char* kSearchPubmed = "search_pubmed";
inline constexpr const char* kSearchTrials = "search_trials";
inline constexpr const char* kTrialSummary = "get_trial_summary";

/// One document returned to an agent, for leakage audits.
struct ObservedDocument {
    std::string doc_id;
    Date date;
    /// True only for the subject trial's own registration record.
    bool own_record = false;
};

struct ToolCallRecord {
    std::string tool;
    std::string subject_nct_id;
    Date cutoff;
    std::vector<ObservedDocument> documents;
};

using ToolObserver = std::function<void(const ToolCallRecord&)>;

struct ToolContext {
    const RetrievalIndex* pubmed = nullptr;
    const RetrievalIndex* trials = nullptr;
    std::size_t default_k = 5;
    std::size_t max_k = 20;
    /// Characters of body text shown per hit.
    std::size_t snippet_chars = 1200;
    ToolObserver observer;
};

/// The three retrieval tools, bound to `subject`: searches only return
/// documents dated strictly before the subject's start date, and the summary
/// tool returns the subject's own registration record. Tools whose index is
/// missing are omitted.
std::vector<Tool> make_tools(const ToolContext& ctx, const TrialRecord& subject);

}  // namespace autoct
