#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "oaembed/corpus.hpp"

namespace oaembed {

// Renders the PubMed advanced-search string: every term as a parenthesized
// field expression, OR-joined left to right, then AND-ed with the date range.
std::string build_query(const QuerySpec& spec);

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Minimal GET transport so tests can swap in canned responses.
class Transport {
public:
    virtual ~Transport() = default;
    // path is relative to the service root, query already URL-encoded.
    virtual HttpResponse get(const std::string& path_and_query) = 0;
};

std::unique_ptr<Transport> make_http_transport(const std::string& base_url);

// Token-bucket style limiter: at most max_per_second calls per sliding second.
// The clock is injectable so tests can drive it without sleeping.
class RateLimiter {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit RateLimiter(int max_per_second,
                         Clock clock = [] { return std::chrono::steady_clock::now(); },
                         Sleeper sleeper = [](std::chrono::milliseconds d) {
                             std::this_thread::sleep_for(d);
                         });

    void acquire();

private:
    int max_per_second_;
    Clock clock_;
    Sleeper sleeper_;
    std::vector<std::chrono::steady_clock::time_point> recent_;
};

struct PubMedClientOptions {
    int rate_limit_per_second = 3;  // NCBI policy without an API key
    std::string api_key;            // appended as &api_key= when non-empty
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{1000};
};

// E-utilities client: esearch for PMIDs, efetch for abstract records.
class PubMedClient {
public:
    PubMedClient(std::unique_ptr<Transport> transport, PubMedClientOptions options = {});
    PubMedClient(std::unique_ptr<Transport> transport, PubMedClientOptions options,
                 RateLimiter limiter);

    // Paginated esearch; duplicates returned by the service are dropped.
    std::vector<std::uint64_t> search_ids(const std::string& query, int page_size = 10000);

    // Batched efetch; output order follows input id order. Records without an
    // abstract yield a Document with empty text.
    std::vector<Document> fetch_documents(const std::vector<std::uint64_t>& ids,
                                          int batch_size = 200);

private:
    HttpResponse get_with_retry(const std::string& path_and_query);

    std::unique_ptr<Transport> transport_;
    PubMedClientOptions options_;
    RateLimiter limiter_;
};

// Exposed for fixture-driven tests.
std::vector<Document> parse_efetch_xml(const std::string& xml);
std::vector<std::uint64_t> parse_esearch_json(const std::string& json,
                                              std::size_t* total_count);

std::string url_encode(const std::string& s);

}  // namespace oaembed
