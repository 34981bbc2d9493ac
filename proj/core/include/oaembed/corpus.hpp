#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oaembed {

// PubMed advanced-search query: MeSH terms and major topics OR-folded,
// AND-ed with a publication-date range. "3000" is the open-ended upper bound.
struct QuerySpec {
    std::vector<std::string> mesh_terms;
    std::vector<std::string> mesh_major_topics;
    std::string date_from = "2010/01/01";
    std::string date_to = "3000";

    bool operator==(const QuerySpec&) const = default;
    void validate() const;  // throws UsageError on violation
};

// One PubMed abstract record. Abstract may be empty (ingest is lossless;
// short documents are filtered later by the pipeline).
struct Document {
    std::uint64_t pmid = 0;
    std::string title;
    std::string abstract_text;
    std::string pub_date;

    bool operator==(const Document&) const = default;
};

struct Corpus {
    std::vector<Document> documents;
    std::string fetched_at;  // ISO-8601, UTC
    QuerySpec query;

    bool operator==(const Corpus&) const = default;
};

// JSONL persistence. Line 1 is a metadata header ({"fetched_at":..,"query":..});
// each following line is one document with fields pmid/title/abstract/pub_date.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

// Tokenized-document file, one {"pmid":..,"tokens":[..]} object per line.
struct TokenizedDoc {
    std::uint64_t pmid = 0;
    std::vector<std::string> tokens;
    bool operator==(const TokenizedDoc&) const = default;
};

void save_tokens(const std::vector<TokenizedDoc>& docs, const std::string& path);
std::vector<TokenizedDoc> load_tokens(const std::string& path);

}  // namespace oaembed
