#include <doctest.h>

#include "autoct/common/hash.hpp"
#include "autoct/common/rng.hpp"
#include "autoct/retrieval/search.hpp"

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <unistd.h>

using namespace autoct;

namespace {

Document doc(const std::string& id, const std::string& body, const std::string& date = "2000-01-01",
             Source source = Source::PubMed) {
    Document d;
    d.doc_id = id;
    d.source = source;
    d.body = body;
    d.date = Date::parse_or_throw(date);
    return d;
}

std::shared_ptr<const Embedder> hashing() { return std::make_shared<HashingEmbedder>(256); }

const Date kFuture = Date::from_ymd(2100, 1, 1);

std::vector<Document> random_corpus(Rng& rng, std::size_t n, Source source = Source::PubMed) {
    static const std::vector<std::string> vocab = {"aspirin", "trial", "placebo", "dose",
                                                   "phase",   "tumor", "safety",  "efficacy"};
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::string body;
        const std::size_t len = 1 + rng.uniform_index(8);
        for (std::size_t t = 0; t < len; ++t) body += vocab[rng.uniform_index(vocab.size())] + " ";
        Document d = doc("d" + std::to_string(i), body, "2000-01-01", source);
        d.date = Date::from_ymd(2000, 1, 1).plus_days(static_cast<std::int64_t>(rng.uniform_index(60)));
        docs.push_back(d);
    }
    return docs;
}

std::string random_query(Rng& rng) {
    static const std::vector<std::string> words = {"aspirin", "trial", "dose", "safety", "unknownword"};
    std::string q;
    const std::size_t len = 1 + rng.uniform_index(3);
    for (std::size_t i = 0; i < len; ++i) q += words[rng.uniform_index(words.size())] + " ";
    return q;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Aspirin, 81mg/day (Phase-II)") ==
          std::vector<std::string>{"aspirin", "81mg", "day", "phase", "ii"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("caf\xc3\xa9 au lait") == std::vector<std::string>{"caf\xc3\xa9", "au", "lait"});
}

TEST_CASE("corpus JSONL parsing reports the failing line") {
    std::istringstream ok(
        R"({"doc_id":"p1","source":"pubmed","title":"t","body":"b","date":"2001-02-03"})"
        "\n\n"
        R"({"doc_id":"NCT1","source":"nct","title":"t","body":"b","date":"2001-02-03","nct_id":"NCT1"})"
        "\n");
    auto docs = read_corpus_jsonl(ok);
    REQUIRE(docs.size() == 2);
    CHECK(docs[1].nct_id == "NCT1");

    std::istringstream bad(R"({"doc_id":"p1","source":"pubmed","title":"t","body":"b","date":"2001-02-03"})"
                           "\n"
                           R"({"doc_id":"p2","source":"pubmed","title":"t","body":"b","date":"2001-02-30"})"
                           "\n");
    try {
        (void)read_corpus_jsonl(bad);
        FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream not_json("{oops\n");
    CHECK_THROWS_AS(read_corpus_jsonl(not_json), MalformedRecord);
    std::istringstream bad_source(R"({"doc_id":"p","source":"web","title":"","body":"","date":"2001-02-03"})");
    CHECK_THROWS_AS(read_corpus_jsonl(bad_source), MalformedRecord);
}

TEST_CASE("ingest statistics") {
    auto idx = RetrievalIndex::build({doc("a", "one two"), doc("b", "one"), doc("c", "one two three")}, hashing());
    CHECK(idx.size() == 3);
    CHECK(idx.avg_doc_length() == doctest::Approx(2.0));
    CHECK(idx.document_frequency("one") == 3);
    CHECK(idx.document_frequency("three") == 1);

    auto again = RetrievalIndex::build({doc("a", "one two"), doc("b", "one"), doc("c", "one two three")}, hashing());
    CHECK(again.avg_doc_length() == idx.avg_doc_length());

    auto empty = RetrievalIndex::build({}, hashing());
    CHECK(empty.size() == 0);
    CHECK(bm25_search(empty, "one", 5, kFuture).empty());
    CHECK(vector_search(empty, "one", 5, kFuture).empty());
    CHECK(hybrid_search(empty, "one", 5, kFuture).empty());

    CHECK_THROWS_AS(RetrievalIndex::build({doc("a", "x"), doc("a", "y")}, hashing()), DuplicateDocId);
}

TEST_CASE("bm25 hand-evaluated score") {
    auto idx = RetrievalIndex::build({doc("A", "aspirin trial aspirin"), doc("B", "placebo trial")}, hashing());
    auto hits = bm25_search(idx, "aspirin", 5, kFuture);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].doc_id == "A");
    // N=2, df=1, tf=2, |A|=3, avgdl=2.5: ln(2) * 5 / (2 + 1.5 * (0.25 + 0.75 * 1.2)).
    CHECK(hits[0].score == doctest::Approx(0.9303989000804634).epsilon(1e-12));

    CHECK(bm25_search(idx, "ibuprofen", 5, kFuture).empty());
    CHECK_THROWS_AS(bm25_search(idx, "aspirin", 0, kFuture), std::invalid_argument);
}

TEST_CASE("cutoff is strict") {
    auto idx = RetrievalIndex::build({doc("A", "aspirin", "2010-01-01")}, hashing());
    const Date same = Date::from_ymd(2010, 1, 1);
    CHECK(bm25_search(idx, "aspirin", 5, same).empty());
    CHECK(vector_search(idx, "aspirin", 5, same).empty());
    CHECK(bm25_search(idx, "aspirin", 5, same.plus_days(1)).size() == 1);
}

TEST_CASE("hashing embedder") {
    HashingEmbedder e(256);
    auto v = e.embed("aspirin aspirin");
    const std::uint64_t h = fnv1a64("aspirin");
    const double expected = ((h >> 32) & 1U) ? -1.0 : 1.0;
    CHECK(v[h % 256] == doctest::Approx(expected));
    double sq = 0.0;
    for (double x : e.embed("Some longer text about a dose escalation trial")) sq += x * x;
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.embed("x y z") == e.embed("x y z"));
    for (double x : e.embed("  ")) CHECK(x == 0.0);
}

TEST_CASE("vector search ranks by brute-force cosine") {
    std::vector<Document> docs = {doc("a", "aspirin reduces cardiovascular events"),
                                  doc("b", "placebo controlled aspirin trial"), doc("c", "tumor response rate")};
    auto idx = RetrievalIndex::build(docs, hashing());
    const std::string query = "aspirin trial";
    HashingEmbedder e(256);
    const auto q = e.embed(query);
    std::vector<Hit> oracle;
    for (const auto& d : docs) {
        const auto v = e.embed(d.title + "\n" + d.body);
        double c = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) c += q[i] * v[i];
        if (c > 0.0) oracle.push_back({d.doc_id, c});
    }
    std::sort(oracle.begin(), oracle.end(), [](const Hit& x, const Hit& y) {
        return x.score != y.score ? x.score > y.score : x.doc_id < y.doc_id;
    });
    auto hits = vector_search(idx, query, 3, kFuture);
    REQUIRE(hits.size() == oracle.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
        CHECK(hits[i].doc_id == oracle[i].doc_id);
        CHECK(hits[i].score == doctest::Approx(oracle[i].score).epsilon(1e-12));
    }

    auto self = vector_search(idx, "\nplacebo controlled aspirin trial", 1, kFuture);
    REQUIRE(self.size() == 1);
    CHECK(self[0].doc_id == "b");
    CHECK(self[0].score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hybrid search uses reciprocal rank fusion") {
    auto single = RetrievalIndex::build({doc("only", "aspirin trial")}, hashing());
    auto hits = hybrid_search(single, "aspirin", 5, kFuture);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].doc_id == "only");
    CHECK(hits[0].score == doctest::Approx(2.0 / 61.0).epsilon(1e-12));
    CHECK(hits[0].score == doctest::Approx(0.032787).epsilon(1e-5));

    auto idx = RetrievalIndex::build({doc("a", "aspirin"), doc("b", "tumor growth")}, hashing());
    for (const auto& h : hybrid_search(idx, "aspirin", 5, kFuture)) CHECK(h.doc_id != "b");
}

TEST_CASE("related-trial search excludes trials that began on or after the subject start") {
    auto idx = RetrievalIndex::build({doc("NCT_same", "aspirin", "2015-06-01", Source::Nct),
                                      doc("NCT_prev", "aspirin", "2015-05-31", Source::Nct)},
                                     hashing());
    auto hits = nct_exclusion_search(idx, "aspirin", 5, Date::from_ymd(2015, 6, 1));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].doc_id == "NCT_prev");

    auto empty = RetrievalIndex::build({}, hashing());
    CHECK(nct_exclusion_search(empty, "aspirin", 5, Date::from_ymd(2015, 6, 1)).empty());

    auto mixed = RetrievalIndex::build({doc("p", "aspirin")}, hashing());
    CHECK_THROWS_AS(nct_exclusion_search(mixed, "aspirin", 5, kFuture), std::invalid_argument);
}

TEST_CASE("leakage safety over randomized corpora") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        auto idx = RetrievalIndex::build(random_corpus(rng, 1 + rng.uniform_index(12)), hashing());
        const Date cutoff = Date::from_ymd(2000, 1, 1).plus_days(static_cast<std::int64_t>(rng.uniform_index(70)));
        const std::size_t k = 1 + rng.uniform_index(6);
        const std::string q = random_query(rng);
        for (const auto& list :
             {bm25_search(idx, q, k, cutoff), vector_search(idx, q, k, cutoff), hybrid_search(idx, q, k, cutoff)}) {
            CHECK(list.size() <= k);
            for (const auto& h : list) CHECK(idx.document(*idx.find(h.doc_id)).date < cutoff);
        }
    }
}

TEST_CASE("bm25 term score is monotone in term frequency") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const double tf = static_cast<double>(rng.uniform_index(20));
        const double len = tf + 1.0 + static_cast<double>(rng.uniform_index(50));
        const double avgdl = 1.0 + 30.0 * rng.uniform_unit();
        const double idf = bm25_idf(1 + rng.uniform_index(100), 1);
        // One more occurrence lengthens the document by one token as well.
        CHECK(bm25_term_score(tf + 1.0, len + 1.0, avgdl, idf) >= bm25_term_score(tf, len, avgdl, idf));
        CHECK(bm25_term_score(tf + 1.0, len, avgdl, idf) >= bm25_term_score(tf, len, avgdl, idf));
    }
}

TEST_CASE("hybrid output is a subset of the fused top-2k lists, and searches are deterministic") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto docs = random_corpus(rng, 2 + rng.uniform_index(15));
        auto idx = RetrievalIndex::build(docs, hashing());
        auto idx2 = RetrievalIndex::build(docs, hashing());
        const std::string q = random_query(rng);
        const std::size_t k = 1 + rng.uniform_index(4);
        std::set<std::string> pool;
        for (const auto& h : bm25_search(idx, q, 2 * k, kFuture)) pool.insert(h.doc_id);
        for (const auto& h : vector_search(idx, q, 2 * k, kFuture)) pool.insert(h.doc_id);
        const auto fused = hybrid_search(idx, q, k, kFuture);
        for (const auto& h : fused) CHECK(pool.contains(h.doc_id));
        CHECK(fused == hybrid_search(idx2, q, k, kFuture));
        for (std::size_t i = 1; i < fused.size(); ++i) {
            CHECK((fused[i - 1].score > fused[i].score ||
                   (fused[i - 1].score == fused[i].score && fused[i - 1].doc_id < fused[i].doc_id)));
        }
    }
}

TEST_CASE("index save and load round-trips bit-exactly") {
    Rng rng(3);
    auto docs = random_corpus(rng, 20);
    docs[0].title = "Caf\xc3\xa9 \"quoted\" title";
    auto idx = RetrievalIndex::build(docs, hashing());
    const auto dir = std::filesystem::temp_directory_path() / ("autoct_index_" + std::to_string(::getpid()));
    idx.save(dir.string());
    auto loaded = RetrievalIndex::load(dir.string(), hashing());
    CHECK(loaded.size() == idx.size());
    CHECK(loaded.avg_doc_length() == idx.avg_doc_length());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(loaded.document(i) == idx.document(i));
        CHECK(loaded.embedding(i) == idx.embedding(i));
    }
    for (const char* q : {"aspirin trial", "dose safety", "tumor"}) {
        CHECK(hybrid_search(loaded, q, 5, kFuture) == hybrid_search(idx, q, 5, kFuture));
        CHECK(bm25_search(loaded, q, 5, kFuture) == bm25_search(idx, q, 5, kFuture));
    }
    CHECK_THROWS(RetrievalIndex::load(dir.string(), std::make_shared<HashingEmbedder>(128)));
    std::filesystem::remove_all(dir);
}
