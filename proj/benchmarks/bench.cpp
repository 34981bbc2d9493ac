#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "oaembed/similarity.hpp"
#include "oaembed/text.hpp"
#include "oaembed/train.hpp"
#include "oaembed/vocab.hpp"

using namespace oaembed;

namespace {

EmbeddingModel make_model(std::size_t v, std::size_t d, std::uint64_t seed) {
    std::vector<std::string> words;
    std::vector<std::uint64_t> counts;
    for (std::size_t i = 0; i < v; ++i) {
        words.push_back("w" + std::to_string(i));
        counts.push_back(v - i + 1);
    }
    EmbeddingModel m;
    m.vocab = Vocabulary::from_id_ordered(std::move(words), std::move(counts));
    m.dim = d;
    m.input.resize(v * d);
    m.context.resize(v * d);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
    for (auto& x : m.input) x = unit(rng) + 0.01f;
    return m;
}

std::vector<std::vector<std::string>> make_sentences(int n) {
    std::mt19937_64 rng(7);
    std::vector<std::string> pool;
    for (int i = 0; i < 200; ++i) pool.push_back("word" + std::to_string(i));
    std::vector<std::vector<std::string>> out(n);
    for (auto& s : out) {
        for (int t = 0; t < 20; ++t) s.push_back(pool[rng() % pool.size()]);
    }
    return out;
}

void bm_nearest_neighbors(benchmark::State& state) {
    auto m = make_model(std::size_t(state.range(0)), 100, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nearest_neighbors(m, "w0", 20));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_nearest_neighbors)->Arg(1000)->Arg(10000)->Arg(50000);

void bm_train_epoch(benchmark::State& state) {
    auto sentences = make_sentences(int(state.range(0)));
    auto vocab = Vocabulary::build(sentences, 1);
    std::vector<std::vector<std::uint32_t>> corpus;
    for (const auto& s : sentences) corpus.push_back(vocab.to_ids(s));
    TrainingConfig config;
    config.dim = 64;
    config.epochs = 1;
    config.min_count = 1;
    config.subsample_threshold = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train(corpus, vocab, config));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(bm_train_epoch)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void bm_tokenize(benchmark::State& state) {
    std::ostringstream text;
    for (int i = 0; i < 500; ++i) {
        text << "Knee osteoarthritis pain scores improved after treatment " << i
             << " (p<0.05). ";
    }
    std::string s = text.str();
    for (auto _ : state) {
        benchmark::DoNotOptimize(tokenize(denoise(s)));
    }
    state.SetBytesProcessed(state.iterations() * s.size());
}
BENCHMARK(bm_tokenize);

void bm_noise_sampling(benchmark::State& state) {
    auto sentences = make_sentences(500);
    auto vocab = Vocabulary::build(sentences, 1);
    std::mt19937_64 rng(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vocab.sample_noise(rng()));
    }
}
BENCHMARK(bm_noise_sampling);

}  // namespace

BENCHMARK_MAIN();
