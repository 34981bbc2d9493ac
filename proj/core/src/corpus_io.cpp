#include "oaembed/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "oaembed/errors.hpp"

namespace oaembed {

using nlohmann::json;

void QuerySpec::validate() const {
    if (mesh_terms.empty() && mesh_major_topics.empty()) {
        throw UsageError("query spec needs at least one MeSH term or major topic");
    }
    if (date_from > date_to) {
        throw UsageError("date_from must not be after date_to: " + date_from + " > " +
                         date_to);
    }
}

namespace {

json query_to_json(const QuerySpec& q) {
    return {{"mesh_terms", q.mesh_terms},
            {"mesh_major_topics", q.mesh_major_topics},
            {"date_from", q.date_from},
            {"date_to", q.date_to}};
}

QuerySpec query_from_json(const json& j) {
    QuerySpec q;
    q.mesh_terms = j.value("mesh_terms", std::vector<std::string>{});
    q.mesh_major_topics = j.value("mesh_major_topics", std::vector<std::string>{});
    q.date_from = j.value("date_from", std::string{});
    q.date_to = j.value("date_to", std::string{});
    return q;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& path) {
    auto out = open_out(path);
    json header = {{"fetched_at", corpus.fetched_at},
                   {"query", query_to_json(corpus.query)}};
    out << header.dump() << '\n';
    for (const auto& d : corpus.documents) {
        json rec = {{"pmid", d.pmid},
                    {"title", d.title},
                    {"abstract", d.abstract_text},
                    {"pub_date", d.pub_date}};
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Corpus load_corpus(const std::string& path) {
    auto in = open_in(path);
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    std::unordered_set<std::uint64_t> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw CorruptFileError(path + ": invalid JSON at line " +
                                   std::to_string(lineno));
        }
        if (lineno == 1 && j.contains("query")) {
            corpus.fetched_at = j.value("fetched_at", std::string{});
            corpus.query = query_from_json(j["query"]);
            continue;
        }
        if (!j.contains("pmid") || !j.contains("title") || !j.contains("abstract") ||
            !j.contains("pub_date")) {
            throw CorruptFileError(path + ": missing document field at line " +
                                   std::to_string(lineno));
        }
        Document d;
        d.pmid = j["pmid"].get<std::uint64_t>();
        d.title = j["title"].get<std::string>();
        d.abstract_text = j["abstract"].get<std::string>();
        d.pub_date = j["pub_date"].get<std::string>();
        if (!seen.insert(d.pmid).second) {
            throw CorruptFileError(path + ": duplicate pmid " + std::to_string(d.pmid) +
                                   " at line " + std::to_string(lineno));
        }
        corpus.documents.push_back(std::move(d));
    }
    return corpus;
}

void save_tokens(const std::vector<TokenizedDoc>& docs, const std::string& path) {
    auto out = open_out(path);
    for (const auto& d : docs) {
        json rec = {{"pmid", d.pmid}, {"tokens", d.tokens}};
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<TokenizedDoc> load_tokens(const std::string& path) {
    auto in = open_in(path);
    std::vector<TokenizedDoc> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("pmid") || !j.contains("tokens")) {
            throw CorruptFileError(path + ": invalid token record at line " +
                                   std::to_string(lineno));
        }
        TokenizedDoc d;
        d.pmid = j["pmid"].get<std::uint64_t>();
        d.tokens = j["tokens"].get<std::vector<std::string>>();
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace oaembed
