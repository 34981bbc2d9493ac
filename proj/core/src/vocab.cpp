#include "oaembed/vocab.hpp"

#include <algorithm>
#include <cmath>

#include "oaembed/errors.hpp"

namespace oaembed {

namespace {
constexpr std::size_t kNoiseTableSize = 1u << 20;
constexpr double kNoisePower = 0.75;
}  // namespace

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sequences,
                             std::uint64_t min_count) {
    if (min_count < 1) throw UsageError("min_count must be >= 1");
    std::unordered_map<std::string, std::uint64_t> raw;
    for (const auto& seq : sequences) {
        for (const auto& tok : seq) ++raw[tok];
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [word, count] : raw) {
        if (count >= min_count) kept.emplace_back(word, count);
    }
    if (kept.empty()) throw DomainError("empty vocabulary: no word reaches min_count");
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.id_to_word_.reserve(kept.size());
    v.counts_.reserve(kept.size());
    for (auto& [word, count] : kept) {
        v.word_to_id_.emplace(word, std::uint32_t(v.id_to_word_.size()));
        v.id_to_word_.push_back(word);
        v.counts_.push_back(count);
        v.total_tokens_ += count;
    }
    v.build_noise_table();
    return v;
}

Vocabulary Vocabulary::from_id_ordered(std::vector<std::string> words,
                                       std::vector<std::uint64_t> counts) {
    if (words.size() != counts.size() || words.empty()) {
        throw DomainError("word and count lists must be non-empty and equal length");
    }
    Vocabulary v;
    v.id_to_word_ = std::move(words);
    v.counts_ = std::move(counts);
    for (std::size_t i = 0; i < v.id_to_word_.size(); ++i) {
        v.word_to_id_.emplace(v.id_to_word_[i], std::uint32_t(i));
        v.total_tokens_ += v.counts_[i];
    }
    v.build_noise_table();
    return v;
}

void Vocabulary::build_noise_table() {
    noise_table_.resize(kNoiseTableSize);
    double norm = 0.0;
    for (auto c : counts_) norm += std::pow(double(c), kNoisePower);
    std::size_t filled = 0;
    double cumulative = 0.0;
    for (std::uint32_t id = 0; id < counts_.size(); ++id) {
        cumulative += std::pow(double(counts_[id]), kNoisePower) / norm;
        auto until = std::size_t(cumulative * double(kNoiseTableSize));
        until = std::min(until, kNoiseTableSize);
        for (; filled < until; ++filled) noise_table_[filled] = id;
    }
    for (; filled < kNoiseTableSize; ++filled) {
        noise_table_[filled] = std::uint32_t(counts_.size() - 1);
    }
}

std::uint32_t Vocabulary::id_of(const std::string& w) const {
    auto it = word_to_id_.find(w);
    if (it == word_to_id_.end()) throw OovError(w);
    return it->second;
}

const std::string& Vocabulary::word_of(std::uint32_t id) const {
    if (id >= id_to_word_.size()) throw DomainError("word id out of range");
    return id_to_word_[id];
}

std::uint32_t Vocabulary::sample_noise(std::uint64_t random_value) const {
    return noise_table_[random_value % noise_table_.size()];
}

std::vector<std::uint32_t> Vocabulary::to_ids(const std::vector<std::string>& tokens,
                                              bool drop_oov) const {
    std::vector<std::uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto it = word_to_id_.find(t);
        if (it != word_to_id_.end()) {
            ids.push_back(it->second);
        } else if (!drop_oov) {
            throw OovError(t);
        }
    }
    return ids;
}

}  // namespace oaembed
