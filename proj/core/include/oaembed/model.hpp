#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oaembed/vocab.hpp"

namespace oaembed {

enum class TrainMode : std::uint8_t { SkipGram = 0, Cbow = 1 };

std::string to_string(TrainMode mode);
TrainMode parse_mode(const std::string& s);  // throws UsageError

// Input embeddings (W) and context vectors (W'), both V x D row-major.
struct EmbeddingModel {
    std::vector<float> input;    // W
    std::vector<float> context;  // W'
    std::size_t dim = 0;
    TrainMode mode = TrainMode::SkipGram;
    Vocabulary vocab;

    std::size_t vocab_size() const { return vocab.size(); }

    std::span<float> input_row(std::uint32_t id) {
        return {input.data() + std::size_t(id) * dim, dim};
    }
    std::span<const float> input_row(std::uint32_t id) const {
        return {input.data() + std::size_t(id) * dim, dim};
    }
    std::span<float> context_row(std::uint32_t id) {
        return {context.data() + std::size_t(id) * dim, dim};
    }
    std::span<const float> context_row(std::uint32_t id) const {
        return {context.data() + std::size_t(id) * dim, dim};
    }
};

// Binary model file, little-endian:
//   magic "OAEMBED1" | mode u8 | V u64 | D u64 |
//   V x (word_len u32, utf-8 bytes, count u64) | W f32[V*D] | W' f32[V*D]
void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

struct TrainingConfig {
    std::size_t dim = 100;
    int window = 5;
    int epochs = 5;
    int negatives = 5;
    double lr_initial = 0.025;
    double lr_final = 0.0001;
    double subsample_threshold = 1e-3;
    std::uint64_t min_count = 5;
    std::uint64_t seed = 1;
    TrainMode mode = TrainMode::SkipGram;
    int threads = 1;

    void validate() const;  // throws UsageError
};

struct TrainingReport {
    std::vector<double> epoch_mean_loss;
    std::uint64_t tokens_processed = 0;
    double wall_seconds = 0.0;
};

}  // namespace oaembed
