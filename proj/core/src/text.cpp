#include "oaembed/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "oaembed/errors.hpp"

namespace oaembed {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// A token is an email address when it contains '@' followed somewhere by a
// dotted domain ("a@b.c").
bool looks_like_email(const std::string& token) {
    auto at = token.find('@');
    if (at == std::string::npos || at == 0 || at + 1 >= token.size()) return false;
    auto dot = token.find('.', at + 2);
    return dot != std::string::npos && dot + 1 < token.size();
}

}  // namespace

std::string denoise(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            out.push_back(text[i]);
            ++i;
            continue;
        }
        auto end = i;
        while (end < text.size() && !is_space(text[end])) ++end;
        std::string token = text.substr(i, end - i);
        if (!looks_like_email(token)) {
            for (char c : token) {
                if (c >= '0' && c <= '9') continue;
                if (c == '[' || c == ']' || c == '%') continue;
                out.push_back(c);
            }
        }
        i = end;
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        char lower = char(std::tolower(c));
        if (lower >= 'a' && lower <= 'z') {
            current.push_back(lower);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

StopList load_stoplist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stoplist: " + path);
    StopList list;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        auto e = line.find_last_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::string word = line.substr(b, e - b + 1);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        list.words.insert(std::move(word));
    }
    return list;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopList& stoplist) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!stoplist.contains(t)) out.push_back(t);
    }
    return out;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] != b[j - 1]);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::unordered_map<std::string, std::string> fuzzy_merge(
    const std::unordered_map<std::string, std::uint64_t>& counts,
    std::size_t max_distance) {
    // Frequent candidates sorted by descending count then word, so the best
    // match wins deterministically.
    std::vector<std::pair<std::string, std::uint64_t>> by_count(counts.begin(),
                                                                counts.end());
    std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::unordered_map<std::string, std::string> mapping;
    for (const auto& [word, count] : counts) {
        std::string canonical = word;
        if (word.size() >= 6) {
            for (const auto& [candidate, cand_count] : by_count) {
                if (count * 10 >= cand_count) break;  // sorted: no better left
                if (candidate == word) continue;
                if (levenshtein(word, candidate) <= max_distance) {
                    canonical = candidate;
                    break;
                }
            }
        }
        mapping.emplace(word, std::move(canonical));
    }
    // Collapse chains so canonical words are fixed points.
    for (auto& [word, canonical] : mapping) {
        auto next = mapping.find(canonical);
        while (next != mapping.end() && next->second != canonical) {
            canonical = next->second;
            next = mapping.find(canonical);
        }
    }
    return mapping;
}

}  // namespace oaembed
