#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "oaembed/corpus.hpp"
#include "oaembed/errors.hpp"
#include "oaembed/pubmed.hpp"

using namespace oaembed;

namespace {

const char* kReferenceQuery =
    "((((knee osteoarthritides[MeSH Terms]) OR (knee osteoarthritis[MeSH Terms])) "
    "OR (knee osteoarthritides[MeSH Major Topic])) OR (knee osteoarthritis[MeSH "
    "Major Topic])) AND ((\"2010/01/01\"[Date - Publication] : \"3000\"[Date - "
    "Publication]))";

QuerySpec reference_spec() {
    QuerySpec spec;
    spec.mesh_terms = {"knee osteoarthritides", "knee osteoarthritis"};
    spec.mesh_major_topics = {"knee osteoarthritides", "knee osteoarthritis"};
    spec.date_from = "2010/01/01";
    spec.date_to = "3000";
    return spec;
}

// Canned transport: responds per request index, records every path.
class MockTransport : public Transport {
public:
    std::vector<std::string> responses;
    std::vector<std::string> log;
    std::vector<int> failures_before_success;  // per-call TransportError count

    HttpResponse get(const std::string& path) override {
        log.push_back(path);
        if (!failures_before_success.empty() && failures_before_success.front() > 0) {
            --failures_before_success.front();
            throw TransportError("injected failure");
        }
        if (responses.empty()) return {404, ""};
        auto body = responses.front();
        responses.erase(responses.begin());
        return {200, body};
    }
};

PubMedClientOptions fast_options() {
    PubMedClientOptions o;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.rate_limit_per_second = 1000;
    return o;
}

std::string esearch_body(std::size_t count, const std::vector<int>& ids) {
    std::string idlist;
    for (int id : ids) {
        if (!idlist.empty()) idlist += ",";
        idlist += "\"" + std::to_string(id) + "\"";
    }
    return "{\"esearchresult\":{\"count\":\"" + std::to_string(count) +
           "\",\"idlist\":[" + idlist + "]}}";
}

std::string article_xml(int pmid, const std::string& title,
                        const std::string& abstract) {
    std::string xml = "<PubmedArticle><MedlineCitation><PMID Version=\"1\">" +
                      std::to_string(pmid) + "</PMID><Article><ArticleTitle>" + title +
                      "</ArticleTitle>";
    if (!abstract.empty()) {
        xml += "<Abstract><AbstractText>" + abstract + "</AbstractText></Abstract>";
    }
    xml += "<Journal><JournalIssue><PubDate><Year>2020</Year><Month>01</Month>"
           "</PubDate></JournalIssue></Journal></Article></MedlineCitation>"
           "</PubmedArticle>";
    return xml;
}

std::string efetch_body(const std::string& articles) {
    return "<?xml version=\"1.0\"?><PubmedArticleSet>" + articles +
           "</PubmedArticleSet>";
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("build_query reproduces the published query string byte for byte") {
    CHECK(build_query(reference_spec()) == kReferenceQuery);
}

TEST_CASE("build_query single term has no OR chain") {
    QuerySpec spec;
    spec.mesh_terms = {"gout"};
    CHECK(build_query(spec) ==
          "(gout[MeSH Terms]) AND ((\"2010/01/01\"[Date - Publication] : "
          "\"3000\"[Date - Publication]))");
}

TEST_CASE("build_query left-folds mixed terms and topics") {
    QuerySpec spec;
    spec.mesh_terms = {"a", "b"};
    spec.mesh_major_topics = {"c"};
    auto q = build_query(spec);
    CHECK(q.starts_with(
        "(((a[MeSH Terms]) OR (b[MeSH Terms])) OR (c[MeSH Major Topic])) AND ("));
}

TEST_CASE("build_query rejects an empty spec") {
    CHECK_THROWS_AS(build_query(QuerySpec{}), UsageError);
}

TEST_CASE("build_query rejects reversed dates") {
    QuerySpec spec;
    spec.mesh_terms = {"gout"};
    spec.date_from = "2020/01/01";
    spec.date_to = "2010/01/01";
    CHECK_THROWS_AS(build_query(spec), UsageError);
}

TEST_CASE("build_query is pure") {
    CHECK(build_query(reference_spec()) == build_query(reference_spec()));
}

TEST_CASE("search_ids paginates and concatenates pages") {
    auto transport = std::make_unique<MockTransport>();
    auto* t = transport.get();
    t->responses = {esearch_body(3, {1, 2}), esearch_body(3, {3})};
    PubMedClient client(std::move(transport), fast_options());
    auto ids = client.search_ids("anything", 2);
    CHECK(ids == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(t->log.size() == 2);
    CHECK(t->log[0].find("retstart=0") != std::string::npos);
    CHECK(t->log[1].find("retstart=2") != std::string::npos);
}

TEST_CASE("search_ids drops duplicate pmids returned by the service") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {esearch_body(4, {7, 8}), esearch_body(4, {8, 9})};
    PubMedClient client(std::move(transport), fast_options());
    CHECK(client.search_ids("q", 2) == std::vector<std::uint64_t>{7, 8, 9});
}

TEST_CASE("search_ids on an empty result set") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {esearch_body(0, {})};
    PubMedClient client(std::move(transport), fast_options());
    CHECK(client.search_ids("nothing matches this", 100).empty());
}

TEST_CASE("search_ids rejects a page size beyond the service cap") {
    PubMedClient client(std::make_unique<MockTransport>(), fast_options());
    CHECK_THROWS_AS(client.search_ids("q", 10001), UsageError);
}

TEST_CASE("fetch_documents parses a PubmedArticle record") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {efetch_body(article_xml(42, "T", "A"))};
    PubMedClient client(std::move(transport), fast_options());
    auto docs = client.fetch_documents({42});
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].pmid == 42);
    CHECK(docs[0].title == "T");
    CHECK(docs[0].abstract_text == "A");
    CHECK(docs[0].pub_date == "2020/01");
}

TEST_CASE("records without an abstract yield empty text") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {efetch_body(article_xml(7, "Title only", ""))};
    PubMedClient client(std::move(transport), fast_options());
    auto docs = client.fetch_documents({7});
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].abstract_text.empty());
}

TEST_CASE("fetch batches and preserves input id order") {
    auto transport = std::make_unique<MockTransport>();
    auto* t = transport.get();
    // Second batch answers out of order; output must follow the request.
    t->responses = {efetch_body(article_xml(1, "a", "x") + article_xml(2, "b", "y")),
                    efetch_body(article_xml(3, "c", "z"))};
    PubMedClient client(std::move(transport), fast_options());
    auto docs = client.fetch_documents({1, 2, 3}, 2);
    CHECK(t->log.size() == 2);
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].pmid == 1);
    CHECK(docs[1].pmid == 2);
    CHECK(docs[2].pmid == 3);
}

TEST_CASE("fetch_documents requires a non-empty id list") {
    PubMedClient client(std::make_unique<MockTransport>(), fast_options());
    CHECK_THROWS_AS(client.fetch_documents({}), UsageError);
}

TEST_CASE("transport errors are retried with backoff, then surfaced") {
    auto transport = std::make_unique<MockTransport>();
    transport->failures_before_success = {2};
    transport->responses = {esearch_body(1, {5})};
    PubMedClient client(std::move(transport), fast_options());
    CHECK(client.search_ids("q", 100) == std::vector<std::uint64_t>{5});

    auto failing = std::make_unique<MockTransport>();
    failing->failures_before_success = {99};
    PubMedClient doomed(std::move(failing), fast_options());
    CHECK_THROWS_AS(doomed.search_ids("q", 100), TransportError);
}

TEST_CASE("malformed esearch response raises a parse error") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {"<html>not json</html>"};
    PubMedClient client(std::move(transport), fast_options());
    CHECK_THROWS_AS(client.search_ids("q", 100), ParseError);
}

TEST_CASE("xml parse error names the offending batch") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {"<PubmedArticleSet><PubmedArticle>truncated"};
    PubMedClient client(std::move(transport), fast_options());
    try {
        client.fetch_documents({123});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("123") != std::string::npos);
    }
}

TEST_CASE("rate limiter grants at most 3 per second under a mock clock") {
    using namespace std::chrono;
    auto now = steady_clock::time_point{};
    std::vector<steady_clock::time_point> grants;
    RateLimiter limiter(
        3, [&] { return now; },
        [&](milliseconds d) { now += d; });
    for (int i = 0; i < 10; ++i) {
        limiter.acquire();
        grants.push_back(now);
    }
    for (std::size_t i = 0; i < grants.size(); ++i) {
        int in_window = 0;
        for (std::size_t j = 0; j <= i; ++j) {
            if (grants[i] - grants[j] < seconds(1)) ++in_window;
        }
        CHECK(in_window <= 3);
    }
}

TEST_CASE("corpus JSONL round-trip preserves every field") {
    Corpus corpus;
    corpus.fetched_at = "2026-08-23T00:00:00Z";
    corpus.query = reference_spec();
    corpus.documents = {
        {1, "Knee OA", "An abstract about cartilage.", "2020/01/01"},
        {2, "TKA outcomes", "", "2021/05"},
    };
    auto path = temp_path("oaembed_corpus_rt.jsonl");
    save_corpus(corpus, path);
    CHECK(load_corpus(path) == corpus);
    std::remove(path.c_str());
}

TEST_CASE("empty corpus round-trips") {
    Corpus corpus;
    corpus.query = reference_spec();
    auto path = temp_path("oaembed_corpus_empty.jsonl");
    save_corpus(corpus, path);
    auto loaded = load_corpus(path);
    CHECK(loaded.documents.empty());
    CHECK(loaded == corpus);
    std::remove(path.c_str());
}

TEST_CASE("round-trip property over randomized unicode corpora") {
    std::mt19937_64 rng(20260823);
    const std::vector<std::string> pieces = {"knee", "κνημη", "膝", "ostéo", "\"q\"",
                                             "a\\b", "line\nbreak", "tab\there", ""};
    for (int trial = 0; trial < 25; ++trial) {
        Corpus corpus;
        corpus.fetched_at = "t";
        corpus.query = reference_spec();
        std::size_t n = rng() % 8;
        for (std::size_t i = 0; i < n; ++i) {
            Document d;
            d.pmid = i + 1;
            for (int w = 0; w < 4; ++w) {
                d.title += pieces[rng() % pieces.size()];
                d.abstract_text += pieces[rng() % pieces.size()] + " ";
            }
            d.pub_date = "2020/01/0" + std::to_string(1 + i % 9);
            corpus.documents.push_back(std::move(d));
        }
        auto path = temp_path("oaembed_corpus_prop.jsonl");
        save_corpus(corpus, path);
        CHECK(load_corpus(path) == corpus);
        std::remove(path.c_str());
    }
}

TEST_CASE("truncated final line is a corrupt-file error naming the line") {
    auto path = temp_path("oaembed_corpus_bad.jsonl");
    std::ofstream out(path);
    out << R"({"fetched_at":"t","query":{"mesh_terms":["x"]}})" << "\n";
    out << R"({"pmid":1,"title":"a","abstract":"b","pub_date":"c"})" << "\n";
    out << R"({"pmid":2,"title":"trunc)";
    out.close();
    try {
        load_corpus(path);
        FAIL("expected CorruptFileError");
    } catch (const CorruptFileError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("duplicate pmids in a corpus file are rejected") {
    auto path = temp_path("oaembed_corpus_dup.jsonl");
    std::ofstream out(path);
    out << R"({"pmid":1,"title":"a","abstract":"b","pub_date":"c"})" << "\n";
    out << R"({"pmid":1,"title":"a","abstract":"b","pub_date":"c"})" << "\n";
    out.close();
    CHECK_THROWS_AS(load_corpus(path), CorruptFileError);
    std::remove(path.c_str());
}

TEST_CASE("url_encode escapes query metacharacters") {
    CHECK(url_encode("a b") == "a%20b");
    CHECK(url_encode("(\"x\")") == "%28%22x%22%29");
    CHECK(url_encode("safe-chars_.~") == "safe-chars_.~");
}
