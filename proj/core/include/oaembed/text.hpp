#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace oaembed {

// Strips email addresses (whitespace-delimited tokens containing '@' with a
// dotted domain), decimal digits, and the characters '[' ']' '%'.
// Total and idempotent; everything else passes through.
std::string denoise(const std::string& text);

// Lowercases, then splits on anything outside [a-z]. Empty fragments dropped.
std::vector<std::string> tokenize(const std::string& text);

struct StopList {
    std::unordered_set<std::string> words;

    bool contains(const std::string& w) const { return words.count(w) != 0; }
};

// The bundled 179-word English list.
const StopList& default_stoplist();

// One lowercase word per line; '#' starts a comment.
StopList load_stoplist(const std::string& path);

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopList& stoplist);

std::size_t levenshtein(const std::string& a, const std::string& b);

// Folds rare spelling variants into frequent words: a word maps to a frequent
// word when its count is below 10% of the frequent word's, edit distance is
// <= max_distance, and the variant is at least 6 characters long. Canonical
// words are fixed points, so the mapping is idempotent.
std::unordered_map<std::string, std::string> fuzzy_merge(
    const std::unordered_map<std::string, std::uint64_t>& counts,
    std::size_t max_distance);

}  // namespace oaembed
