#pragma once

#include <string>
#include <vector>

#include "oaembed/similarity.hpp"

namespace oaembed {

struct StarGraphSpec {
    std::string center;
    std::vector<std::pair<std::string, double>> spokes;  // (word, score)
    int canvas = 600;
};

struct ColorScale {
    std::string positive_low = "#ffffff";   // cosine 0
    std::string positive_high = "#08306b";  // cosine 1
    std::string negative_high = "#a50f15";  // cosine -1
};

struct HeatmapSpec {
    SimilarityMatrix matrix;
    ColorScale scale;
};

// Deterministic SVG: center label plus radial spokes at equal angular
// spacing, ordered by descending score from 12 o'clock clockwise, ties by
// word. Edge labels carry the score rounded half-to-even to 2 decimals.
std::string render_star(const StarGraphSpec& spec);

// Deterministic SVG grid in spec word order, cells linearly interpolated on
// the color scale.
std::string render_heatmap(const HeatmapSpec& spec);

// Full-precision CSV: header row/column of words, shortest round-trip doubles.
std::string heatmap_csv(const SimilarityMatrix& matrix);
SimilarityMatrix parse_heatmap_csv(const std::string& csv);

// Half-to-even rounding to 2 decimals, as printed on figure labels.
std::string format_score_label(double v);

}  // namespace oaembed
