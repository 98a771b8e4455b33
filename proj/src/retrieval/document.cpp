#include "autoct/retrieval/document.hpp"

#include <fstream>
#include <stdexcept>

namespace autoct {

std::optional<Source> parse_source(std::string_view text) {
    if (text == "pubmed") return Source::PubMed;
    if (text == "nct") return Source::Nct;
    return std::nullopt;
}

std::string_view to_string(Source s) { return s == Source::PubMed ? "pubmed" : "nct"; }

nlohmann::json to_json(const Document& doc) {
    nlohmann::json j = {{"doc_id", doc.doc_id},
                        {"source", to_string(doc.source)},
                        {"title", doc.title},
                        {"body", doc.body},
                        {"date", doc.date.to_string()}};
    if (doc.nct_id) j["nct_id"] = *doc.nct_id;
    return j;
}

namespace {

std::string required_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing key '") + key + "'");
    if (!it->is_string()) throw std::invalid_argument(std::string("key '") + key + "' is not a string");
    return it->get<std::string>();
}

}  // namespace

Document document_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
    Document doc;
    doc.doc_id = required_string(j, "doc_id");
    if (doc.doc_id.empty()) throw std::invalid_argument("empty doc_id");
    const std::string source = required_string(j, "source");
    auto parsed = parse_source(source);
    if (!parsed) throw std::invalid_argument("unknown source '" + source + "'");
    doc.source = *parsed;
    doc.title = required_string(j, "title");
    doc.body = required_string(j, "body");
    const std::string date = required_string(j, "date");
    auto d = Date::parse(date);
    if (!d) throw std::invalid_argument("invalid date '" + date + "'");
    doc.date = *d;
    if (auto it = j.find("nct_id"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw std::invalid_argument("key 'nct_id' is not a string");
        if (doc.source != Source::Nct) throw std::invalid_argument("nct_id given on a pubmed record");
        doc.nct_id = it->get<std::string>();
    }
    return doc;
}

std::vector<Document> read_corpus_jsonl(std::istream& in) {
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            docs.push_back(document_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(line_no, e.what());
        } catch (const std::invalid_argument& e) {
            throw MalformedRecord(line_no, e.what());
        }
    }
    return docs;
}

std::vector<Document> load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus " + path);
    return read_corpus_jsonl(in);
}

void write_corpus_jsonl(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) out << to_json(d).dump() << '\n';
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80) {
            current.push_back(ch);
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace autoct
