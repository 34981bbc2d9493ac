#include "oaembed/viz.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "oaembed/errors.hpp"

namespace oaembed {

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Shortest round-trip representation.
std::string full_precision(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct Rgb {
    int r = 0, g = 0, b = 0;
};

Rgb parse_hex(const std::string& hex) {
    if (hex.size() != 7 || hex[0] != '#') throw UsageError("bad color: " + hex);
    auto nibble = [&](std::size_t i) { return std::stoi(hex.substr(i, 2), nullptr, 16); };
    return {nibble(1), nibble(3), nibble(5)};
}

std::string lerp_color(const Rgb& a, const Rgb& b, double t) {
    auto mix = [&](int x, int y) {
        return int(std::lround(double(x) + t * (double(y) - double(x))));
    };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", mix(a.r, b.r), mix(a.g, b.g),
                  mix(a.b, b.b));
    return buf;
}

}  // namespace

std::string format_score_label(double v) {
    // Half-to-even at 2 decimals; fesetround default is to-nearest-even.
    double scaled = std::nearbyint(v * 100.0);
    long long n = static_cast<long long>(scaled);
    bool negative = n < 0;
    unsigned long long mag = negative ? (unsigned long long)(-n) : (unsigned long long)n;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%llu.%02llu", negative ? "-" : "", mag / 100,
                  mag % 100);
    return buf;
}

std::string render_star(const StarGraphSpec& spec) {
    if (spec.spokes.empty()) throw UsageError("star graph needs at least one spoke");
    for (const auto& [word, score] : spec.spokes) {
        if (score < -1.0 || score > 1.0) {
            throw UsageError("spoke score out of [-1,1]: " + word);
        }
    }
    auto spokes = spec.spokes;
    std::sort(spokes.begin(), spokes.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    const double cx = spec.canvas / 2.0;
    const double cy = spec.canvas / 2.0;
    const double radius = spec.canvas * 0.38;
    const double pi = std::acos(-1.0);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.canvas
        << "\" height=\"" << spec.canvas << "\" viewBox=\"0 0 " << spec.canvas << " "
        << spec.canvas << "\">\n";
    svg << "  <g font-family=\"sans-serif\" font-size=\"14\">\n";
    for (std::size_t i = 0; i < spokes.size(); ++i) {
        // 12 o'clock, then clockwise at equal spacing.
        double theta = -pi / 2.0 + 2.0 * pi * double(i) / double(spokes.size());
        double x = cx + radius * std::cos(theta);
        double y = cy + radius * std::sin(theta);
        svg << "    <line x1=\"" << fixed2(cx) << "\" y1=\"" << fixed2(cy)
            << "\" x2=\"" << fixed2(x) << "\" y2=\"" << fixed2(y)
            << "\" stroke=\"#555555\"/>\n";
    }
    svg << "    <text x=\"" << fixed2(cx) << "\" y=\"" << fixed2(cy)
        << "\" text-anchor=\"middle\" font-weight=\"bold\">" << spec.center
        << "</text>\n";
    for (std::size_t i = 0; i < spokes.size(); ++i) {
        double theta = -pi / 2.0 + 2.0 * pi * double(i) / double(spokes.size());
        double x = cx + (radius + 18.0) * std::cos(theta);
        double y = cy + (radius + 18.0) * std::sin(theta);
        svg << "    <text x=\"" << fixed2(x) << "\" y=\"" << fixed2(y)
            << "\" text-anchor=\"middle\">" << spokes[i].first << " ("
            << format_score_label(spokes[i].second) << ")</text>\n";
    }
    svg << "  </g>\n</svg>\n";
    return svg.str();
}

std::string render_heatmap(const HeatmapSpec& spec) {
    const auto& m = spec.matrix;
    const auto n = m.words.size();
    if (n < 1) throw UsageError("heatmap needs a non-empty matrix");
    const Rgb lo = parse_hex(spec.scale.positive_low);
    const Rgb hi = parse_hex(spec.scale.positive_high);
    const Rgb neg = parse_hex(spec.scale.negative_high);

    const int cell = 40;
    const int margin = 110;
    const int size = margin + int(n) * cell + 10;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
        << "\" height=\"" << size << "\" viewBox=\"0 0 " << size << " " << size
        << "\">\n";
    svg << "  <g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = m.at(i, j);
            std::string color = v >= 0.0 ? lerp_color(lo, hi, v)
                                         : lerp_color(lo, neg, -v);
            int x = margin + int(j) * cell;
            int y = margin + int(i) * cell;
            svg << "    <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << color
                << "\" stroke=\"#dddddd\"/>\n";
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        int y = margin + int(i) * cell + cell / 2 + 4;
        svg << "    <text x=\"" << (margin - 6) << "\" y=\"" << y
            << "\" text-anchor=\"end\">" << m.words[i] << "</text>\n";
        int x = margin + int(i) * cell + cell / 2;
        svg << "    <text x=\"" << x << "\" y=\"" << (margin - 6)
            << "\" text-anchor=\"middle\" transform=\"rotate(-45 " << x << " "
            << (margin - 6) << ")\">" << m.words[i] << "</text>\n";
    }
    svg << "  </g>\n</svg>\n";
    return svg.str();
}

std::string heatmap_csv(const SimilarityMatrix& matrix) {
    std::ostringstream out;
    for (const auto& w : matrix.words) out << "," << w;
    out << "\n";
    const auto n = matrix.words.size();
    for (std::size_t i = 0; i < n; ++i) {
        out << matrix.words[i];
        for (std::size_t j = 0; j < n; ++j) out << "," << full_precision(matrix.at(i, j));
        out << "\n";
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

SimilarityMatrix parse_heatmap_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw CorruptFileError("empty heatmap CSV");
    auto header = split_csv_line(line);
    if (header.size() < 2 || !header[0].empty()) {
        throw CorruptFileError("heatmap CSV header must start with an empty cell");
    }
    SimilarityMatrix m;
    m.words.assign(header.begin() + 1, header.end());
    const auto n = m.words.size();
    m.values.reserve(n * n);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != n + 1 || fields[0] != m.words[rows]) {
            throw CorruptFileError("heatmap CSV row mismatch at data row " +
                                   std::to_string(rows + 1));
        }
        for (std::size_t j = 1; j <= n; ++j) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(fields[j].data(),
                                             fields[j].data() + fields[j].size(), v);
            if (ec != std::errc{}) {
                throw CorruptFileError("bad number in heatmap CSV: " + fields[j]);
            }
            m.values.push_back(v);
        }
        ++rows;
    }
    if (rows != n) throw CorruptFileError("heatmap CSV row count mismatch");
    return m;
}

}  // namespace oaembed
