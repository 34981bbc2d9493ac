#pragma once

#include <span>
#include <string>
#include <vector>

#include "oaembed/model.hpp"

namespace oaembed {

// u.v / (|u||v|), clamped to [-1,1]. Throws DomainError on a zero-norm input.
double cosine_similarity(std::span<const float> u, std::span<const float> v);

struct SimilarityResult {
    std::string query;
    std::vector<std::pair<std::string, double>> neighbors;  // non-increasing score
    std::vector<std::size_t> model_ids;
};

// Top-k by cosine over input-embedding rows, query excluded, ties by
// ascending word id. Throws OovError for unknown terms.
SimilarityResult nearest_neighbors(const EmbeddingModel& model,
                                   const std::string& term, std::size_t k);

// Cross-model averaging: a candidate's score is the mean of its cosine scores
// over the models whose top-k contain it; candidates re-ranked by that mean.
SimilarityResult ensemble_query(std::span<const EmbeddingModel> models,
                                const std::string& term, std::size_t k);

struct SimilarityMatrix {
    std::vector<std::string> words;
    std::vector<double> values;  // row-major, words.size() squared

    double at(std::size_t i, std::size_t j) const {
        return values[i * words.size() + j];
    }
};

// Pairwise cosines over W rows. OOV words are reported to `warnings` and
// dropped; fewer than two surviving words is an error.
SimilarityMatrix similarity_matrix(const EmbeddingModel& model,
                                   const std::vector<std::string>& words,
                                   std::vector<std::string>* warnings = nullptr);

struct EvaluationReport {
    struct PerTerm {
        std::string term;
        double best_cosine = 0.0;
    };
    std::vector<std::string> extracted;   // union of ensemble top-k per query
    std::vector<PerTerm> per_term;        // reference terms found in vocabulary
    double precision_at_k = 0.0;
    double mean_best_cosine = 0.0;
    double threshold = 0.44;
    bool pass = false;
};

// Strictly-greater rule from the 0.44 acceptance threshold.
bool threshold_pass(double mean_best_cosine, double threshold);

EvaluationReport evaluate(std::span<const EmbeddingModel> models,
                          const std::vector<std::string>& query_terms,
                          const std::vector<std::string>& reference_terms,
                          std::size_t k, double threshold = 0.44);

std::string report_to_json(const EvaluationReport& report);

}  // namespace oaembed
