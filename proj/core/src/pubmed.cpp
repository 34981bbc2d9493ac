#include "oaembed/pubmed.hpp"

#include <algorithm>
#include <cctype>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "oaembed/errors.hpp"

namespace oaembed {

std::string build_query(const QuerySpec& spec) {
    spec.validate();
    std::vector<std::string> clauses;
    for (const auto& t : spec.mesh_terms) clauses.push_back("(" + t + "[MeSH Terms])");
    for (const auto& t : spec.mesh_major_topics) {
        clauses.push_back("(" + t + "[MeSH Major Topic])");
    }
    // Left-folded OR chain, each fold re-parenthesized.
    std::string terms = clauses.front();
    for (std::size_t i = 1; i < clauses.size(); ++i) {
        terms = "(" + terms + " OR " + clauses[i] + ")";
    }
    return terms + " AND ((\"" + spec.date_from + "\"[Date - Publication] : \"" +
           spec.date_to + "\"[Date - Publication]))";
}

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size() * 3);
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(char(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out;
}

namespace {

class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(std::string base_url) : base_url_(std::move(base_url)) {}

    HttpResponse get(const std::string& path_and_query) override {
        httplib::Client client(base_url_);
        client.set_connection_timeout(30);
        client.set_read_timeout(60);
        client.set_follow_location(true);
        auto res = client.Get(path_and_query);
        if (!res) {
            throw TransportError("request failed: " + base_url_ + path_and_query +
                                 " (" + httplib::to_string(res.error()) + ")");
        }
        return {res->status, res->body};
    }

private:
    std::string base_url_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url) {
    return std::make_unique<HttplibTransport>(base_url);
}

RateLimiter::RateLimiter(int max_per_second, Clock clock, Sleeper sleeper)
    : max_per_second_(max_per_second), clock_(std::move(clock)),
      sleeper_(std::move(sleeper)) {}

void RateLimiter::acquire() {
    using namespace std::chrono;
    for (;;) {
        auto now = clock_();
        std::erase_if(recent_, [&](auto t) { return now - t >= seconds(1); });
        if (int(recent_.size()) < max_per_second_) {
            recent_.push_back(now);
            return;
        }
        auto wait = duration_cast<milliseconds>(recent_.front() + seconds(1) - now);
        sleeper_(std::max(wait, milliseconds(1)));
    }
}

PubMedClient::PubMedClient(std::unique_ptr<Transport> transport,
                           PubMedClientOptions options)
    : PubMedClient(std::move(transport), options,
                   RateLimiter(options.rate_limit_per_second)) {}

PubMedClient::PubMedClient(std::unique_ptr<Transport> transport,
                           PubMedClientOptions options, RateLimiter limiter)
    : transport_(std::move(transport)), options_(options), limiter_(std::move(limiter)) {}

HttpResponse PubMedClient::get_with_retry(const std::string& path_and_query) {
    auto backoff = options_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        limiter_.acquire();
        try {
            auto res = transport_->get(path_and_query);
            if (res.status >= 500) {
                throw TransportError("server error " + std::to_string(res.status));
            }
            if (res.status != 200) {
                throw TransportError("unexpected HTTP status " +
                                     std::to_string(res.status), attempt);
            }
            return res;
        } catch (const TransportError& e) {
            if (attempt >= options_.max_retries) {
                throw TransportError(std::string(e.what()) + " (after " +
                                     std::to_string(attempt) + " attempts)", attempt);
            }
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
}

std::vector<std::uint64_t> parse_esearch_json(const std::string& body,
                                              std::size_t* total_count) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("esearchresult")) {
        throw ParseError("malformed esearch response");
    }
    const auto& r = j["esearchresult"];
    if (total_count) *total_count = std::stoull(r.value("count", std::string("0")));
    std::vector<std::uint64_t> ids;
    for (const auto& id : r.value("idlist", nlohmann::json::array())) {
        ids.push_back(std::stoull(id.get<std::string>()));
    }
    return ids;
}

std::vector<std::uint64_t> PubMedClient::search_ids(const std::string& query,
                                                    int page_size) {
    if (page_size < 1 || page_size > 10000) {
        throw UsageError("page_size must be in 1..10000");
    }
    std::vector<std::uint64_t> ids;
    std::unordered_set<std::uint64_t> seen;
    std::size_t total = 0;
    for (std::size_t offset = 0;; offset += std::size_t(page_size)) {
        std::string path = "/entrez/eutils/esearch.fcgi?db=pubmed&retmode=json&term=" +
                           url_encode(query) + "&retstart=" + std::to_string(offset) +
                           "&retmax=" + std::to_string(page_size);
        if (!options_.api_key.empty()) path += "&api_key=" + url_encode(options_.api_key);
        auto res = get_with_retry(path);
        auto page = parse_esearch_json(res.body, &total);
        for (auto id : page) {
            if (seen.insert(id).second) ids.push_back(id);
        }
        if (page.empty() || offset + page.size() >= total) break;
    }
    return ids;
}

namespace {

// Targeted extraction from PubMed efetch XML. Finds the text content of the
// first <tag ...>...</tag> after `from`, stripping any nested markup.
std::string xml_text_between(const std::string& xml, const std::string& tag,
                             std::size_t from, std::size_t limit,
                             std::size_t* found_at = nullptr) {
    std::string open = "<" + tag;
    std::string close = "</" + tag + ">";
    auto start = xml.find(open, from);
    while (start != std::string::npos && start < limit) {
        char after = xml[start + open.size()];
        if (after == '>' || after == ' ') break;
        start = xml.find(open, start + 1);
    }
    if (start == std::string::npos || start >= limit) return {};
    auto content_begin = xml.find('>', start);
    if (content_begin == std::string::npos) return {};
    ++content_begin;
    auto end = xml.find(close, content_begin);
    if (end == std::string::npos || end > limit) return {};
    if (found_at) *found_at = start;
    std::string raw = xml.substr(content_begin, end - content_begin);
    std::string out;
    bool in_tag = false;
    for (char c : raw) {
        if (c == '<') in_tag = true;
        else if (c == '>') in_tag = false;
        else if (!in_tag) out.push_back(c);
    }
    // Minimal entity decoding for the set efetch actually emits.
    auto replace_all = [](std::string& s, const std::string& a, const std::string& b) {
        for (auto p = s.find(a); p != std::string::npos; p = s.find(a, p + b.size())) {
            s.replace(p, a.size(), b);
        }
    };
    replace_all(out, "&lt;", "<");
    replace_all(out, "&gt;", ">");
    replace_all(out, "&quot;", "\"");
    replace_all(out, "&apos;", "'");
    replace_all(out, "&amp;", "&");
    return out;
}

std::string extract_pub_date(const std::string& xml, std::size_t from,
                             std::size_t limit) {
    auto pd = xml.find("<PubDate", from);
    if (pd == std::string::npos || pd >= limit) return {};
    auto pd_end = xml.find("</PubDate>", pd);
    if (pd_end == std::string::npos) pd_end = limit;
    std::string year = xml_text_between(xml, "Year", pd, pd_end);
    std::string month = xml_text_between(xml, "Month", pd, pd_end);
    std::string day = xml_text_between(xml, "Day", pd, pd_end);
    std::string out = year;
    if (!month.empty()) out += "/" + month;
    if (!day.empty()) out += "/" + day;
    return out;
}

}  // namespace

std::vector<Document> parse_efetch_xml(const std::string& xml) {
    std::vector<Document> docs;
    std::size_t pos = 0;
    for (;;) {
        auto art = xml.find("<PubmedArticle", pos);
        if (art == std::string::npos) break;
        auto art_end = xml.find("</PubmedArticle>", art);
        if (art_end == std::string::npos) {
            throw ParseError("unterminated PubmedArticle element");
        }
        Document d;
        std::string pmid = xml_text_between(xml, "PMID", art, art_end);
        if (pmid.empty()) throw ParseError("PubmedArticle without PMID");
        d.pmid = std::stoull(pmid);
        d.title = xml_text_between(xml, "ArticleTitle", art, art_end);
        // Abstracts may have several labelled AbstractText sections.
        auto abs_begin = xml.find("<Abstract>", art);
        if (abs_begin != std::string::npos && abs_begin < art_end) {
            auto abs_end = xml.find("</Abstract>", abs_begin);
            if (abs_end == std::string::npos || abs_end > art_end) abs_end = art_end;
            std::size_t cursor = abs_begin;
            for (;;) {
                std::size_t at = 0;
                std::string part =
                    xml_text_between(xml, "AbstractText", cursor, abs_end, &at);
                if (part.empty()) break;
                if (!d.abstract_text.empty()) d.abstract_text += " ";
                d.abstract_text += part;
                cursor = xml.find("</AbstractText>", at);
                if (cursor == std::string::npos) break;
                cursor += 1;
            }
        }
        d.pub_date = extract_pub_date(xml, art, art_end);
        docs.push_back(std::move(d));
        pos = art_end + 1;
    }
    return docs;
}

std::vector<Document> PubMedClient::fetch_documents(
    const std::vector<std::uint64_t>& ids, int batch_size) {
    if (ids.empty()) throw UsageError("fetch_documents needs a non-empty id list");
    if (batch_size < 1) throw UsageError("batch_size must be positive");
    std::vector<Document> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); i += std::size_t(batch_size)) {
        auto end = std::min(ids.size(), i + std::size_t(batch_size));
        std::string id_list;
        for (std::size_t j = i; j < end; ++j) {
            if (!id_list.empty()) id_list += ",";
            id_list += std::to_string(ids[j]);
        }
        std::string path = "/entrez/eutils/efetch.fcgi?db=pubmed&retmode=xml&id=" +
                           id_list;
        if (!options_.api_key.empty()) path += "&api_key=" + url_encode(options_.api_key);
        auto res = get_with_retry(path);
        std::vector<Document> batch;
        try {
            batch = parse_efetch_xml(res.body);
        } catch (const ParseError& e) {
            throw ParseError("efetch batch starting at id " + std::to_string(ids[i]) +
                             ": " + e.what());
        }
        // Re-order to follow the requested id order within the batch.
        std::unordered_map<std::uint64_t, std::size_t> where;
        for (std::size_t j = 0; j < batch.size(); ++j) where[batch[j].pmid] = j;
        for (std::size_t j = i; j < end; ++j) {
            auto it = where.find(ids[j]);
            if (it != where.end()) out.push_back(std::move(batch[it->second]));
        }
    }
    return out;
}

}  // namespace oaembed
