#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "oaembed/model.hpp"

namespace oaembed {

// Full-softmax probability P(out|in) over the whole vocabulary, computed with
// max-logit subtraction. Validation-only; training uses negative sampling.
double softmax_probability(const EmbeddingModel& model, std::uint32_t w_in,
                           std::uint32_t w_out);

// Loss and analytic gradients of one negative-sampling step:
//   L = -log s(c . w) - sum_k log s(-n_k . w)
// Gradients cover exactly the touched rows: the center input row, the context
// output row, and each noise output row (repeated noise ids get one
// accumulated entry each time they appear in noise_ids).
struct NegSamplingGradients {
    double loss = 0.0;
    std::vector<double> d_center;  // w.r.t. input row of the center
    std::vector<double> d_context;  // w.r.t. context row of the positive word
    std::vector<std::pair<std::uint32_t, std::vector<double>>> d_noise;
};

NegSamplingGradients negative_sampling_loss(const EmbeddingModel& model,
                                            std::uint32_t center,
                                            std::uint32_t context,
                                            std::span<const std::uint32_t> noise_ids);

// Same loss evaluated on arbitrary input/context vectors (CBOW feeds the
// averaged context here); gradients laid out as in NegSamplingGradients.
NegSamplingGradients negative_sampling_loss_vec(
    std::span<const float> center_vec,
    const EmbeddingModel& model, std::uint32_t context,
    std::span<const std::uint32_t> noise_ids);

// Applies an SGD step (subtracts lr * gradient) to the touched rows.
void apply_gradients(EmbeddingModel& model, std::uint32_t center,
                     std::uint32_t context, const NegSamplingGradients& grads,
                     double lr);

// Mean of the input rows of context_ids; the CBOW predictor input.
std::vector<float> cbow_context_vector(const EmbeddingModel& model,
                                       std::span<const std::uint32_t> context_ids);

// p = min(1, sqrt(t/f) + t/f), f = count/total.
double subsample_keep_probability(std::uint64_t count, std::uint64_t total_tokens,
                                  double t);

// Skip-gram pair generation with a dynamic window: per position the actual
// half-window is drawn uniformly from 1..window.
std::vector<std::pair<std::uint32_t, std::uint32_t>> generate_pairs(
    std::span<const std::uint32_t> ids, int window, std::mt19937_64& rng);

// SGD training over epochs x corpus. Single-threaded runs are deterministic
// in (corpus, config); multi-threaded runs shard the corpus and update the
// shared matrices without locks.
std::pair<EmbeddingModel, TrainingReport> train(
    const std::vector<std::vector<std::uint32_t>>& corpus, const Vocabulary& vocab,
    const TrainingConfig& config);

}  // namespace oaembed
