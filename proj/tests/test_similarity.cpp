#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "oaembed/errors.hpp"
#include "oaembed/similarity.hpp"

using namespace oaembed;

namespace {

EmbeddingModel model_from_rows(const std::vector<std::string>& words,
                               const std::vector<std::vector<float>>& rows) {
    EmbeddingModel m;
    m.dim = rows.front().size();
    std::vector<std::uint64_t> counts;
    for (std::size_t i = 0; i < words.size(); ++i) {
        counts.push_back(std::uint64_t(2 * (words.size() - i)));
    }
    m.vocab = Vocabulary::from_id_ordered(words, counts);
    for (const auto& r : rows) m.input.insert(m.input.end(), r.begin(), r.end());
    m.context.assign(m.input.size(), 0.0f);
    return m;
}

EmbeddingModel random_model(std::size_t v, std::size_t d, std::mt19937_64& rng) {
    std::vector<std::string> words;
    std::vector<std::vector<float>> rows;
    std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
    for (std::size_t i = 0; i < v; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "w%03zu", i);
        words.emplace_back(buf);
        std::vector<float> row(d);
        for (auto& x : row) {
            do {
                x = unit(rng);
            } while (x == 0.0f);
        }
        rows.push_back(std::move(row));
    }
    return model_from_rows(words, rows);
}

// Exhaustive oracle: score every word, sort by (-score, id).
std::vector<std::pair<std::string, double>> brute_force_neighbors(
    const EmbeddingModel& m, const std::string& term, std::size_t k) {
    auto qid = m.vocab.id_of(term);
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t id = 0; id < m.vocab_size(); ++id) {
        if (id == qid) continue;
        all.emplace_back(-cosine_similarity(m.input_row(qid), m.input_row(id)), id);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
        out.emplace_back(m.vocab.word_of(all[i].second), -all[i].first);
    }
    return out;
}

}  // namespace

TEST_CASE("cosine of a vector with itself is 1") {
    std::vector<float> u = {0.3f, -2.0f, 5.0f};
    CHECK(cosine_similarity(u, u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cosine of orthogonal vectors is 0") {
    std::vector<float> u = {1.0f, 0.0f};
    std::vector<float> v = {0.0f, 1.0f};
    CHECK(cosine_similarity(u, v) == 0.0);
}

TEST_CASE("cosine hand-computed example") {
    std::vector<float> u = {1.0f, 2.0f, 3.0f};
    std::vector<float> v = {4.0f, 5.0f, 6.0f};
    double expected = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
    CHECK(cosine_similarity(u, v) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cosine_similarity(u, v) == doctest::Approx(0.974632).epsilon(1e-6));
}

TEST_CASE("cosine rejects zero vectors") {
    std::vector<float> z = {0.0f, 0.0f};
    std::vector<float> u = {1.0f, 0.0f};
    CHECK_THROWS_AS(cosine_similarity(z, u), DomainError);
}

TEST_CASE("cosine symmetry and scale invariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> unit(-2.0f, 2.0f);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<float> u(4), v(4);
        for (auto& x : u) x = unit(rng) + 0.1f;
        for (auto& x : v) x = unit(rng) + 0.1f;
        double c = cosine_similarity(u, v);
        CHECK(cosine_similarity(v, u) == c);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        std::vector<float> u2 = u, v2 = v;
        for (auto& x : u2) x *= 3.0f;
        for (auto& x : v2) x *= 0.25f;
        // 3.0f * x rounds in float, so allow float-level tolerance here.
        CHECK(cosine_similarity(u2, v2) == doctest::Approx(c).epsilon(1e-5));
        CHECK(cosine_similarity(u, std::vector<float>(u2)) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("nearest neighbors on a hand-built model") {
    auto m = model_from_rows({"a", "b", "c"},
                             {{1.0f, 0.0f}, {0.9f, 0.1f}, {0.0f, 1.0f}});
    auto res = nearest_neighbors(m, "a", 2);
    REQUIRE(res.neighbors.size() == 2);
    CHECK(res.neighbors[0].first == "b");
    CHECK(res.neighbors[0].second ==
          doctest::Approx(0.9 / std::sqrt(0.81 + 0.01)).epsilon(1e-6));
    CHECK(res.neighbors[1].first == "c");
    CHECK(res.neighbors[1].second == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("k beyond vocabulary returns everything but the query") {
    std::mt19937_64 rng(6);
    auto m = random_model(9, 4, rng);
    auto res = nearest_neighbors(m, "w003", 100);
    CHECK(res.neighbors.size() == 8);
}

TEST_CASE("nearest neighbors of an unknown term is an OOV error") {
    std::mt19937_64 rng(7);
    auto m = random_model(5, 3, rng);
    try {
        nearest_neighbors(m, "gonarthrose", 3);
        FAIL("expected OovError");
    } catch (const OovError& e) {
        CHECK(std::string(e.what()).find("gonarthrose") != std::string::npos);
    }
}

TEST_CASE("nearest neighbors agree with the brute-force oracle") {
    std::mt19937_64 rng(20260823);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t v = 5 + rng() % 196;  // V <= 200
        auto m = random_model(v, 1 + rng() % 16, rng);
        auto term = m.vocab.word_of(std::uint32_t(rng() % v));
        std::size_t k = 1 + rng() % 10;
        auto got = nearest_neighbors(m, term, k);
        auto expected = brute_force_neighbors(m, term, k);
        REQUIRE(got.neighbors.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(got.neighbors[i].first == expected[i].first);
            CHECK(got.neighbors[i].second == expected[i].second);
        }
    }
}

TEST_CASE("neighbor ranking is invariant under uniform positive scaling") {
    std::mt19937_64 rng(8);
    auto m = random_model(40, 6, rng);
    auto before = nearest_neighbors(m, "w000", 10);
    for (auto& x : m.input) x *= 7.5f;
    auto after = nearest_neighbors(m, "w000", 10);
    for (std::size_t i = 0; i < before.neighbors.size(); ++i) {
        CHECK(before.neighbors[i].first == after.neighbors[i].first);
    }
}

TEST_CASE("ensemble of one model equals nearest_neighbors") {
    std::mt19937_64 rng(9);
    std::vector<EmbeddingModel> models;
    models.push_back(random_model(20, 4, rng));
    auto single = nearest_neighbors(models[0], "w001", 5);
    auto ens = ensemble_query(models, "w001", 5);
    REQUIRE(ens.neighbors.size() == single.neighbors.size());
    for (std::size_t i = 0; i < single.neighbors.size(); ++i) {
        CHECK(ens.neighbors[i].first == single.neighbors[i].first);
        CHECK(ens.neighbors[i].second ==
              doctest::Approx(single.neighbors[i].second).epsilon(1e-12));
    }
}

TEST_CASE("ensemble of n copies of a model equals nearest_neighbors") {
    std::mt19937_64 rng(10);
    auto base = random_model(15, 5, rng);
    std::vector<EmbeddingModel> models = {base, base, base};
    auto single = nearest_neighbors(base, "w002", 6);
    auto ens = ensemble_query(models, "w002", 6);
    REQUIRE(ens.neighbors.size() == single.neighbors.size());
    for (std::size_t i = 0; i < single.neighbors.size(); ++i) {
        CHECK(ens.neighbors[i].first == single.neighbors[i].first);
        CHECK(ens.neighbors[i].second ==
              doctest::Approx(single.neighbors[i].second).epsilon(1e-12));
    }
}

TEST_CASE("ensemble averages scores over contributing models") {
    // Query q; in model 1 word x scores ~0.8, in model 2 it scores ~0.6.
    auto m1 = model_from_rows({"q", "x", "far"},
                              {{1.0f, 0.0f}, {0.8f, 0.6f}, {-1.0f, 0.0f}});
    auto m2 = model_from_rows({"q", "x", "far"},
                              {{1.0f, 0.0f}, {0.6f, 0.8f}, {-1.0f, 0.0f}});
    std::vector<EmbeddingModel> models = {m1, m2};
    auto res = ensemble_query(models, "q", 1);
    REQUIRE(res.neighbors.size() == 1);
    CHECK(res.neighbors[0].first == "x");
    CHECK(res.neighbors[0].second == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(res.model_ids == std::vector<std::size_t>{0, 1});
}

TEST_CASE("a word in only one top-k keeps its own score") {
    // "only" appears in m1's vocabulary alone.
    auto m1 = model_from_rows({"q", "only"}, {{1.0f, 0.0f}, {0.5f, 0.866025f}});
    auto m2 = model_from_rows({"q", "other"}, {{1.0f, 0.0f}, {-1.0f, 0.0f}});
    std::vector<EmbeddingModel> models = {m1, m2};
    auto res = ensemble_query(models, "q", 2);
    auto it = std::find_if(res.neighbors.begin(), res.neighbors.end(),
                           [](const auto& p) { return p.first == "only"; });
    REQUIRE(it != res.neighbors.end());
    CHECK(it->second == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("ensemble OOV in every model is an error") {
    std::mt19937_64 rng(11);
    std::vector<EmbeddingModel> models = {random_model(5, 3, rng)};
    CHECK_THROWS_AS(ensemble_query(models, "notaword", 3), OovError);
}

TEST_CASE("similarity matrix of a duplicated word is all ones") {
    std::mt19937_64 rng(12);
    auto m = random_model(6, 4, rng);
    auto matrix = similarity_matrix(m, {"w000", "w000"});
    REQUIRE(matrix.words.size() == 2);
    for (double v : matrix.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("similarity matrix equals brute-force pairwise cosines") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        auto m = random_model(4 + rng() % 30, 1 + rng() % 8, rng);
        std::vector<std::string> words = {"w000", "w001", "w002", "w003"};
        auto matrix = similarity_matrix(m, words);
        for (std::size_t i = 0; i < words.size(); ++i) {
            for (std::size_t j = 0; j < words.size(); ++j) {
                double expected = cosine_similarity(
                    m.input_row(m.vocab.id_of(words[i])),
                    m.input_row(m.vocab.id_of(words[j])));
                CHECK(matrix.at(i, j) == doctest::Approx(expected).epsilon(1e-12));
                CHECK(matrix.at(i, j) == matrix.at(j, i));
            }
            CHECK(matrix.at(i, i) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("similarity matrix drops OOV words with a warning") {
    std::mt19937_64 rng(14);
    auto m = random_model(5, 3, rng);
    std::vector<std::string> warnings;
    auto matrix = similarity_matrix(m, {"w000", "nope", "w001"}, &warnings);
    CHECK(matrix.words == std::vector<std::string>{"w000", "w001"});
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("nope") != std::string::npos);

    CHECK_THROWS_AS(similarity_matrix(m, {"w000", "nope"}), DomainError);
}

TEST_CASE("threshold pass uses the strictly-greater rule") {
    CHECK(!threshold_pass(0.44, 0.44));
    CHECK(threshold_pass(0.44 + 1e-9, 0.44));
    CHECK(!threshold_pass(0.44 - 1e-9, 0.44));
}

TEST_CASE("evaluate where extraction equals the reference") {
    // q's top-1 is exactly the single reference word.
    auto m = model_from_rows({"q", "ref"}, {{1.0f, 0.0f}, {0.9f, 0.1f}});
    std::vector<EmbeddingModel> models = {m};
    auto report = evaluate(models, {"q"}, {"ref"}, 1, 0.44);
    CHECK(report.extracted == std::vector<std::string>{"ref"});
    CHECK(report.precision_at_k == 1.0);
    CHECK(report.mean_best_cosine == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.pass);
}

TEST_CASE("evaluate on a hand-built model with partial overlap") {
    // Query a, top-2 = {b, d}; reference = {b, c}.
    auto m = model_from_rows({"a", "b", "c", "d"},
                             {{1.0f, 0.0f},
                              {0.95f, 0.05f},
                              {0.0f, 1.0f},
                              {0.9f, 0.2f}});
    std::vector<EmbeddingModel> models = {m};
    auto report = evaluate(models, {"a"}, {"b", "c"}, 2, 0.44);
    REQUIRE(report.extracted.size() == 2);
    CHECK(std::find(report.extracted.begin(), report.extracted.end(), "b") !=
          report.extracted.end());
    CHECK(std::find(report.extracted.begin(), report.extracted.end(), "d") !=
          report.extracted.end());
    CHECK(report.precision_at_k == doctest::Approx(0.5));

    // Brute-force oracle for the mean best cosine over reference terms.
    double best_b = -1.0, best_c = -1.0;
    for (const auto& w : report.extracted) {
        best_b = std::max(best_b,
                          cosine_similarity(m.input_row(m.vocab.id_of("b")),
                                            m.input_row(m.vocab.id_of(w))));
        best_c = std::max(best_c,
                          cosine_similarity(m.input_row(m.vocab.id_of("c")),
                                            m.input_row(m.vocab.id_of(w))));
    }
    CHECK(report.mean_best_cosine ==
          doctest::Approx((best_b + best_c) / 2.0).epsilon(1e-12));
    CHECK(report.pass == threshold_pass(report.mean_best_cosine, 0.44));
}

TEST_CASE("evaluate with no reference term in any vocabulary fails") {
    auto m = model_from_rows({"a", "b"}, {{1.0f, 0.0f}, {0.0f, 1.0f}});
    std::vector<EmbeddingModel> models = {m};
    CHECK_THROWS_AS(evaluate(models, {"a"}, {"zzz"}, 1, 0.44), DomainError);
    CHECK_THROWS_AS(evaluate(models, {"a"}, {}, 1, 0.44), UsageError);
}

TEST_CASE("report JSON carries the contract fields") {
    auto m = model_from_rows({"q", "ref"}, {{1.0f, 0.0f}, {0.9f, 0.1f}});
    std::vector<EmbeddingModel> models = {m};
    auto json = report_to_json(evaluate(models, {"q"}, {"ref"}, 1, 0.44));
    for (const char* field : {"precision_at_k", "mean_best_cosine", "threshold",
                              "pass", "per_term"}) {
        CHECK(json.find(field) != std::string::npos);
    }
}
