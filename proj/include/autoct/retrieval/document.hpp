#pragma once

#include "autoct/domain/date.hpp"
#include "autoct/domain/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autoct {

enum class Source { PubMed, Nct };

std::optional<Source> parse_source(std::string_view text);
std::string_view to_string(Source s);

/// One retrievable record: a PubMed abstract or a trial registry entry.
struct Document {
    std::string doc_id;
    Source source = Source::PubMed;
    std::string title;
    std::string body;
    /// Publication date for PubMed, start date for trials.
    Date date;
    std::optional<std::string> nct_id;

    /// Text that is indexed and embedded.
    [[nodiscard]] std::string text() const { return title + "\n" + body; }

    friend bool operator==(const Document&, const Document&) = default;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& what)
        : Error("corpus line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateDocId : public Error {
public:
    explicit DuplicateDocId(const std::string& id) : Error("duplicate doc_id: " + id) {}
};

nlohmann::json to_json(const Document& doc);
/// Throws std::invalid_argument describing the first problem found.
Document document_from_json(const nlohmann::json& j);

/// Reads a JSON-Lines corpus. Blank lines are skipped; line numbers are 1-based.
std::vector<Document> read_corpus_jsonl(std::istream& in);
std::vector<Document> load_corpus_jsonl(const std::string& path);
void write_corpus_jsonl(std::ostream& out, const std::vector<Document>& docs);

/// Lowercased alphanumeric runs. Bytes outside ASCII are kept inside tokens so
/// that UTF-8 words are not split apart.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace autoct
