#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace oaembed {

// Word <-> id mapping with corpus frequencies and a unigram^0.75 noise table
// for negative sampling. Ids are assigned by descending count, ties broken
// lexicographically.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(const std::vector<std::vector<std::string>>& sequences,
                            std::uint64_t min_count);
    // Reconstructs a vocabulary (including the noise table) from an id-ordered
    // word/count listing, as stored in model files.
    static Vocabulary from_id_ordered(std::vector<std::string> words,
                                      std::vector<std::uint64_t> counts);

    std::size_t size() const { return id_to_word_.size(); }
    std::uint64_t total_tokens() const { return total_tokens_; }

    bool contains(const std::string& w) const { return word_to_id_.count(w) != 0; }
    std::uint32_t id_of(const std::string& w) const;  // throws OovError
    const std::string& word_of(std::uint32_t id) const;
    std::uint64_t count_of(std::uint32_t id) const { return counts_[id]; }

    const std::vector<std::string>& words() const { return id_to_word_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    // Draws a word id from the count^0.75 noise distribution.
    std::uint32_t sample_noise(std::uint64_t random_value) const;

    std::vector<std::uint32_t> to_ids(const std::vector<std::string>& tokens,
                                      bool drop_oov = true) const;

    bool operator==(const Vocabulary& other) const {
        return id_to_word_ == other.id_to_word_ && counts_ == other.counts_;
    }

private:
    void build_noise_table();

    std::unordered_map<std::string, std::uint32_t> word_to_id_;
    std::vector<std::string> id_to_word_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_tokens_ = 0;
    std::vector<std::uint32_t> noise_table_;
};

}  // namespace oaembed
