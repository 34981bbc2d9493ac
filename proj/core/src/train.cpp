#include "oaembed/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "oaembed/errors.hpp"

namespace oaembed {

namespace {

constexpr double kMaxLogit = 30.0;  // exp overflow guard

double clamp_logit(double x) {
    return x > kMaxLogit ? kMaxLogit : (x < -kMaxLogit ? -kMaxLogit : x);
}

double sigmoid(double x) {
    x = clamp_logit(x);
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) {
    x = clamp_logit(x);
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
    return s;
}

}  // namespace

double softmax_probability(const EmbeddingModel& model, std::uint32_t w_in,
                           std::uint32_t w_out) {
    const auto v = model.vocab_size();
    if (w_in >= v || w_out >= v) throw DomainError("word id out of range");
    auto x = model.input_row(w_in);
    double max_logit = -std::numeric_limits<double>::infinity();
    std::vector<double> logits(v);
    for (std::uint32_t i = 0; i < v; ++i) {
        logits[i] = dot(model.context_row(i), x);
        max_logit = std::max(max_logit, logits[i]);
    }
    double denom = 0.0;
    for (std::uint32_t i = 0; i < v; ++i) denom += std::exp(logits[i] - max_logit);
    return std::exp(logits[w_out] - max_logit) / denom;
}

NegSamplingGradients negative_sampling_loss_vec(
    std::span<const float> center_vec, const EmbeddingModel& model,
    std::uint32_t context, std::span<const std::uint32_t> noise_ids) {
    const auto v = model.vocab_size();
    if (context >= v) throw DomainError("context id out of range");
    for (auto n : noise_ids) {
        if (n >= v) throw DomainError("noise id out of range");
    }
    const std::size_t d = model.dim;
    NegSamplingGradients g;
    g.d_center.assign(d, 0.0);
    g.d_context.assign(d, 0.0);

    auto ctx = model.context_row(context);
    double pos_logit = dot(center_vec, ctx);
    g.loss = -log_sigmoid(pos_logit);
    double pos_grad = sigmoid(pos_logit) - 1.0;  // dL/d(pos_logit)
    for (std::size_t i = 0; i < d; ++i) {
        g.d_center[i] += pos_grad * double(ctx[i]);
        g.d_context[i] = pos_grad * double(center_vec[i]);
    }
    for (auto n : noise_ids) {
        auto noise = model.context_row(n);
        double logit = dot(center_vec, noise);
        g.loss += -log_sigmoid(-logit);
        double grad = sigmoid(logit);
        auto& d_noise = g.d_noise.emplace_back(n, std::vector<double>(d)).second;
        for (std::size_t i = 0; i < d; ++i) {
            g.d_center[i] += grad * double(noise[i]);
            d_noise[i] = grad * double(center_vec[i]);
        }
    }
    return g;
}

NegSamplingGradients negative_sampling_loss(const EmbeddingModel& model,
                                            std::uint32_t center,
                                            std::uint32_t context,
                                            std::span<const std::uint32_t> noise_ids) {
    if (center >= model.vocab_size()) throw DomainError("center id out of range");
    return negative_sampling_loss_vec(model.input_row(center), model, context,
                                      noise_ids);
}

void apply_gradients(EmbeddingModel& model, std::uint32_t center,
                     std::uint32_t context, const NegSamplingGradients& grads,
                     double lr) {
    auto w = model.input_row(center);
    for (std::size_t i = 0; i < model.dim; ++i) {
        w[i] -= float(lr * grads.d_center[i]);
    }
    auto c = model.context_row(context);
    for (std::size_t i = 0; i < model.dim; ++i) {
        c[i] -= float(lr * grads.d_context[i]);
    }
    for (const auto& [id, d_noise] : grads.d_noise) {
        auto n = model.context_row(id);
        for (std::size_t i = 0; i < model.dim; ++i) {
            n[i] -= float(lr * d_noise[i]);
        }
    }
}

std::vector<float> cbow_context_vector(const EmbeddingModel& model,
                                       std::span<const std::uint32_t> context_ids) {
    if (context_ids.empty()) throw DomainError("CBOW context must be non-empty");
    std::vector<float> mean(model.dim, 0.0f);
    for (auto id : context_ids) {
        auto row = model.input_row(id);
        for (std::size_t i = 0; i < model.dim; ++i) mean[i] += row[i];
    }
    for (auto& x : mean) x /= float(context_ids.size());
    return mean;
}

double subsample_keep_probability(std::uint64_t count, std::uint64_t total_tokens,
                                  double t) {
    double f = double(count) / double(total_tokens);
    double r = t / f;
    return std::min(1.0, std::sqrt(r) + r);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> generate_pairs(
    std::span<const std::uint32_t> ids, int window, std::mt19937_64& rng) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::uniform_int_distribution<int> window_draw(1, window);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        int b = window_draw(rng);
        std::size_t lo = i >= std::size_t(b) ? i - std::size_t(b) : 0;
        std::size_t hi = std::min(ids.size() - 1, i + std::size_t(b));
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j != i) pairs.emplace_back(ids[i], ids[j]);
        }
    }
    return pairs;
}

namespace {

// Fused per-pair update used by the training loop: computes loss, updates the
// touched W' rows in place and accumulates dL/dx into d_x.
double step_against_target(EmbeddingModel& model, std::span<const float> x,
                           std::span<double> d_x, std::uint32_t target,
                           std::span<const std::uint32_t> negatives, double lr) {
    const std::size_t d = model.dim;
    double loss = 0.0;
    std::fill(d_x.begin(), d_x.end(), 0.0);

    auto update_row = [&](std::uint32_t id, double grad) {
        auto row = model.context_row(id);
        for (std::size_t i = 0; i < d; ++i) {
            d_x[i] += grad * double(row[i]);
            row[i] -= float(lr * grad * double(x[i]));
        }
    };

    double pos_logit = dot(x, model.context_row(target));
    loss += -log_sigmoid(pos_logit);
    update_row(target, sigmoid(pos_logit) - 1.0);
    for (auto n : negatives) {
        double logit = dot(x, model.context_row(n));
        loss += -log_sigmoid(-logit);
        update_row(n, sigmoid(logit));
    }
    return loss;
}

struct ShardStats {
    double loss_sum = 0.0;
    std::uint64_t steps = 0;
    std::uint64_t tokens = 0;
};

void train_shard(EmbeddingModel& model, const Vocabulary& vocab,
                 const TrainingConfig& config,
                 std::span<const std::vector<std::uint32_t>> sentences,
                 std::uint64_t rng_seed, std::uint64_t total_positions,
                 std::atomic<std::uint64_t>& processed, ShardStats& stats) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> window_draw(1, config.window);
    const double lr_span = config.lr_initial - config.lr_final;

    std::vector<std::uint32_t> kept;
    std::vector<std::uint32_t> negatives(std::size_t(config.negatives));
    std::vector<double> d_x(config.dim);
    std::vector<std::uint32_t> context_ids;
    std::vector<float> mean;

    for (const auto& sentence : sentences) {
        kept.clear();
        for (auto id : sentence) {
            double p = subsample_keep_probability(vocab.count_of(id),
                                                  vocab.total_tokens(),
                                                  config.subsample_threshold);
            if (p >= 1.0 || unit(rng) < p) kept.push_back(id);
        }
        auto done = processed.fetch_add(sentence.size(), std::memory_order_relaxed);
        stats.tokens += sentence.size();
        double lr = config.lr_initial -
                    lr_span * (double(done) / double(total_positions));
        lr = std::max(lr, config.lr_final);

        for (std::size_t i = 0; i < kept.size(); ++i) {
            int b = window_draw(rng);
            std::size_t lo = i >= std::size_t(b) ? i - std::size_t(b) : 0;
            std::size_t hi = std::min(kept.size() - 1, i + std::size_t(b));
            if (config.mode == TrainMode::SkipGram) {
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    for (auto& n : negatives) n = vocab.sample_noise(rng());
                    auto center = kept[i];
                    stats.loss_sum += step_against_target(
                        model, model.input_row(center), d_x, kept[j], negatives, lr);
                    ++stats.steps;
                    auto w = model.input_row(center);
                    for (std::size_t t = 0; t < config.dim; ++t) {
                        w[t] -= float(lr * d_x[t]);
                    }
                }
            } else {
                context_ids.clear();
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j != i) context_ids.push_back(kept[j]);
                }
                if (context_ids.empty()) continue;
                mean = cbow_context_vector(model, context_ids);
                for (auto& n : negatives) n = vocab.sample_noise(rng());
                stats.loss_sum +=
                    step_against_target(model, mean, d_x, kept[i], negatives, lr);
                ++stats.steps;
                // Mean gradient split equally across contributing rows.
                double share = lr / double(context_ids.size());
                for (auto id : context_ids) {
                    auto row = model.input_row(id);
                    for (std::size_t t = 0; t < config.dim; ++t) {
                        row[t] -= float(share * d_x[t]);
                    }
                }
            }
        }
    }
}

}  // namespace

std::pair<EmbeddingModel, TrainingReport> train(
    const std::vector<std::vector<std::uint32_t>>& corpus, const Vocabulary& vocab,
    const TrainingConfig& config) {
    config.validate();
    if (vocab.size() == 0) throw DomainError("cannot train with an empty vocabulary");
    if (corpus.empty()) throw DomainError("cannot train on an empty corpus");

    const auto start = std::chrono::steady_clock::now();
    EmbeddingModel model;
    model.dim = config.dim;
    model.mode = config.mode;
    model.vocab = vocab;
    model.input.resize(vocab.size() * config.dim);
    model.context.assign(vocab.size() * config.dim, 0.0f);

    std::mt19937_64 init_rng(config.seed);
    const float half = 0.5f / float(config.dim);
    std::uniform_real_distribution<float> init(-half, half);
    for (auto& x : model.input) x = init(init_rng);

    std::uint64_t positions_per_epoch = 0;
    for (const auto& s : corpus) positions_per_epoch += s.size();
    if (positions_per_epoch == 0) throw DomainError("corpus has no tokens");
    const std::uint64_t total_positions =
        std::max<std::uint64_t>(1, positions_per_epoch * std::uint64_t(config.epochs));

    TrainingReport report;
    std::atomic<std::uint64_t> processed{0};
    const int threads = std::min<int>(config.threads, int(corpus.size()));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<ShardStats> stats(std::size_t(std::max(threads, 1)));
        if (threads <= 1) {
            train_shard(model, vocab, config, corpus,
                        config.seed + 0x9E3779B97F4A7C15ull * std::uint64_t(epoch + 1),
                        total_positions, processed, stats[0]);
        } else {
            std::vector<std::thread> workers;
            std::size_t per = (corpus.size() + std::size_t(threads) - 1) /
                              std::size_t(threads);
            for (int tid = 0; tid < threads; ++tid) {
                std::size_t lo = std::size_t(tid) * per;
                std::size_t hi = std::min(corpus.size(), lo + per);
                if (lo >= hi) break;
                workers.emplace_back([&, tid, lo, hi] {
                    std::span<const std::vector<std::uint32_t>> shard(
                        corpus.data() + lo, hi - lo);
                    train_shard(model, vocab, config, shard,
                                config.seed +
                                    0x9E3779B97F4A7C15ull *
                                        std::uint64_t(epoch * threads + tid + 1),
                                total_positions, processed, stats[std::size_t(tid)]);
                });
            }
            for (auto& w : workers) w.join();
        }
        double loss_sum = 0.0;
        std::uint64_t steps = 0;
        for (const auto& s : stats) {
            loss_sum += s.loss_sum;
            steps += s.steps;
            report.tokens_processed += s.tokens;
        }
        report.epoch_mean_loss.push_back(steps ? loss_sum / double(steps) : 0.0);
    }

    for (float x : model.input) {
        if (!std::isfinite(x)) throw DomainError("non-finite value in W after training");
    }
    for (float x : model.context) {
        if (!std::isfinite(x)) throw DomainError("non-finite value in W' after training");
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(model), std::move(report)};
}

}  // namespace oaembed
