#include "oaembed/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "oaembed/errors.hpp"

namespace oaembed {

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += double(u[i]) * double(u[i]);
        vv += double(v[i]) * double(v[i]);
        uv += double(u[i]) * double(v[i]);
    }
    if (uu == 0.0 || vv == 0.0) {
        throw DomainError("cosine similarity is undefined for a zero vector");
    }
    return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

SimilarityResult nearest_neighbors(const EmbeddingModel& model,
                                   const std::string& term, std::size_t k) {
    if (k < 1) throw UsageError("k must be >= 1");
    auto query_id = model.vocab.id_of(term);
    auto q = model.input_row(query_id);

    // (negated score, id): default pair ordering gives descending score with
    // ties broken by ascending id.
    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(model.vocab_size());
    for (std::uint32_t id = 0; id < model.vocab_size(); ++id) {
        if (id == query_id) continue;
        scored.emplace_back(-cosine_similarity(q, model.input_row(id)), id);
    }
    std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(take),
                      scored.end());

    SimilarityResult result;
    result.query = term;
    for (std::size_t i = 0; i < take; ++i) {
        result.neighbors.emplace_back(model.vocab.word_of(scored[i].second),
                                      -scored[i].first);
    }
    return result;
}

SimilarityResult ensemble_query(std::span<const EmbeddingModel> models,
                                const std::string& term, std::size_t k) {
    if (models.empty()) throw UsageError("ensemble_query needs at least one model");
    struct Tally {
        double sum = 0.0;
        int contributors = 0;
    };
    std::map<std::string, Tally> tally;  // ordered: deterministic tie-break by word
    SimilarityResult result;
    result.query = term;
    bool found = false;
    for (std::size_t m = 0; m < models.size(); ++m) {
        if (!models[m].vocab.contains(term)) continue;
        found = true;
        result.model_ids.push_back(m);
        auto top = nearest_neighbors(models[m], term, k);
        for (const auto& [word, score] : top.neighbors) {
            tally[word].sum += score;
            tally[word].contributors += 1;
        }
    }
    if (!found) throw OovError(term);

    std::vector<std::pair<std::string, double>> ranked;
    for (const auto& [word, t] : tally) {
        ranked.emplace_back(word, t.sum / double(t.contributors));
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > k) ranked.resize(k);
    result.neighbors = std::move(ranked);
    return result;
}

SimilarityMatrix similarity_matrix(const EmbeddingModel& model,
                                   const std::vector<std::string>& words,
                                   std::vector<std::string>* warnings) {
    SimilarityMatrix m;
    for (const auto& w : words) {
        if (model.vocab.contains(w)) {
            m.words.push_back(w);
        } else if (warnings) {
            warnings->push_back("dropping out-of-vocabulary word: " + w);
        }
    }
    if (m.words.size() < 2) {
        throw DomainError("similarity matrix needs at least 2 in-vocabulary words");
    }
    const auto n = m.words.size();
    m.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto u = model.input_row(model.vocab.id_of(m.words[i]));
        m.values[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            auto v = model.input_row(model.vocab.id_of(m.words[j]));
            double c = cosine_similarity(u, v);
            m.values[i * n + j] = c;
            m.values[j * n + i] = c;
        }
    }
    return m;
}

bool threshold_pass(double mean_best_cosine, double threshold) {
    return mean_best_cosine > threshold;
}

EvaluationReport evaluate(std::span<const EmbeddingModel> models,
                          const std::vector<std::string>& query_terms,
                          const std::vector<std::string>& reference_terms,
                          std::size_t k, double threshold) {
    if (reference_terms.empty()) throw UsageError("reference term list is empty");
    EvaluationReport report;
    report.threshold = threshold;

    std::map<std::string, bool> extracted;  // ordered for stable output
    for (const auto& q : query_terms) {
        try {
            auto res = ensemble_query(models, q, k);
            for (const auto& [word, score] : res.neighbors) extracted[word] = true;
        } catch (const OovError&) {
            // Query terms missing from every vocabulary contribute nothing.
        }
    }
    for (const auto& [word, _] : extracted) report.extracted.push_back(word);

    std::size_t hits = 0;
    std::unordered_map<std::string, bool> ref_set;
    for (const auto& r : reference_terms) ref_set[r] = true;
    for (const auto& w : report.extracted) {
        if (ref_set.count(w)) ++hits;
    }
    report.precision_at_k =
        report.extracted.empty() ? 0.0
                                 : double(hits) / double(report.extracted.size());

    bool any_ref_in_vocab = false;
    double sum_best = 0.0;
    for (const auto& ref : reference_terms) {
        double best = -1.0;
        bool seen = false;
        for (const auto& model : models) {
            if (!model.vocab.contains(ref)) continue;
            any_ref_in_vocab = true;
            seen = true;
            auto rv = model.input_row(model.vocab.id_of(ref));
            for (const auto& w : report.extracted) {
                if (!model.vocab.contains(w)) continue;
                best = std::max(best, cosine_similarity(
                                          rv, model.input_row(model.vocab.id_of(w))));
            }
        }
        if (seen) {
            report.per_term.push_back({ref, best});
            sum_best += best;
        }
    }
    if (!any_ref_in_vocab) {
        throw DomainError("evaluation impossible: no reference term in any vocabulary");
    }
    report.mean_best_cosine = sum_best / double(report.per_term.size());
    report.pass = threshold_pass(report.mean_best_cosine, threshold);
    return report;
}

std::string report_to_json(const EvaluationReport& report) {
    nlohmann::json per_term = nlohmann::json::array();
    for (const auto& t : report.per_term) {
        per_term.push_back({{"term", t.term}, {"best_cosine", t.best_cosine}});
    }
    nlohmann::json j = {{"precision_at_k", report.precision_at_k},
                        {"mean_best_cosine", report.mean_best_cosine},
                        {"threshold", report.threshold},
                        {"pass", report.pass},
                        {"extracted", report.extracted},
                        {"per_term", per_term}};
    return j.dump(2);
}

}  // namespace oaembed
