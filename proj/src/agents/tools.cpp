#include "autoct/agents/tools.hpp"

#include <stdexcept>

namespace autoct {

namespace {

std::string query_arg(const nlohmann::json& args) {
    if (args.is_string()) return args.get<std::string>();
    if (!args.is_object()) throw ToolFailure("arguments must be an object with a \"query\" string");
    auto it = args.find("query");
    if (it == args.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw ToolFailure("missing \"query\" string argument");
    }
    return it->get<std::string>();
}

std::size_t k_arg(const nlohmann::json& args, const ToolContext& ctx) {
    if (!args.is_object()) return ctx.default_k;
    auto it = args.find("k");
    if (it == args.end() || it->is_null()) return ctx.default_k;
    if (!it->is_number_integer() || it->get<long long>() < 1) throw ToolFailure("\"k\" must be a positive integer");
    return std::min(static_cast<std::size_t>(it->get<long long>()), ctx.max_k);
}

std::string snippet(const std::string& text, std::size_t limit) {
    if (text.size() <= limit) return text;
    std::size_t cut = limit;
    // Do not split a UTF-8 sequence.
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0U) == 0x80U) --cut;
    return text.substr(0, cut) + " ...";
}

std::string render_hits(const RetrievalIndex& index, const std::vector<Hit>& hits, const ToolContext& ctx,
                        std::vector<ObservedDocument>& seen) {
    if (hits.empty()) return "No matching documents.";
    std::string out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const Document& d = index.document(*index.find(hits[i].doc_id));
        seen.push_back({d.doc_id, d.date, false});
        out += "[" + std::to_string(i + 1) + "] " + d.doc_id + " (" + d.date.to_string() + ") " + d.title + "\n" +
               snippet(d.body, ctx.snippet_chars) + "\n\n";
    }
    out.pop_back();
    return out;
}

ToolParam query_param() { return {"query", "string", "search terms"}; }
ToolParam k_param() { return {"k", "integer", "number of results (default 5)"}; }

}  // namespace

std::vector<Tool> make_tools(const ToolContext& ctx, const TrialRecord& subject) {
    std::vector<Tool> tools;
    const Date cutoff = subject.start_date;
    auto notify = [ctx, subject, cutoff](const std::string& tool, std::vector<ObservedDocument> docs) {
        if (ctx.observer) ctx.observer(ToolCallRecord{tool, subject.nct_id, cutoff, std::move(docs)});
    };
    if (ctx.pubmed != nullptr) {
        tools.push_back({{kSearchPubmed,
                          "Search PubMed abstracts published before this trial started.",
                          {query_param(), k_param()}},
                         [ctx, cutoff, notify](const nlohmann::json& args) {
                             const auto hits = hybrid_search(*ctx.pubmed, query_arg(args), k_arg(args, ctx), cutoff);
                             std::vector<ObservedDocument> seen;
                             std::string out = render_hits(*ctx.pubmed, hits, ctx, seen);
                             notify(kSearchPubmed, std::move(seen));
                             return out;
                         }});
    }
    if (ctx.trials != nullptr) {
        tools.push_back({{kSearchTrials,
                          "Search ClinicalTrials.gov records of trials that started before this trial.",
                          {query_param(), k_param()}},
                         [ctx, cutoff, notify](const nlohmann::json& args) {
                             const auto hits =
                                 nct_exclusion_search(*ctx.trials, query_arg(args), k_arg(args, ctx), cutoff);
                             std::vector<ObservedDocument> seen;
                             std::string out = render_hits(*ctx.trials, hits, ctx, seen);
                             notify(kSearchTrials, std::move(seen));
                             return out;
                         }});
        tools.push_back({{kTrialSummary, "Return the ClinicalTrials.gov registration record of the trial under study.", {}},
                         [ctx, subject, notify](const nlohmann::json& args) -> std::string {
                             if (args.is_object()) {
                                 auto it = args.find("nct_id");
                                 if (it != args.end() && it->is_string() && it->get<std::string>() != subject.nct_id) {
                                     throw ToolFailure("only the record of " + subject.nct_id +
                                                       " is available; use search_trials for other trials");
                                 }
                             }
                             auto idx = ctx.trials->find_trial(subject.nct_id);
                             if (!idx) {
                                 notify(kTrialSummary, {});
                                 return "No registration record found for " + subject.nct_id + ".";
                             }
                             const Document& d = ctx.trials->document(*idx);
                             notify(kTrialSummary, {{d.doc_id, d.date, true}});
                             return d.doc_id + " (start " + d.date.to_string() + ") " + d.title + "\n" + d.body;
                         }});
    }
    return tools;
}

}  // namespace autoct
