#include "crashsev/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "crashsev/error.hpp"

namespace crashsev {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Linear blend between a near-white and a deep blue.
std::string heat_color(double v) {
    const double t = std::clamp(v, 0.0, 1.0);
    const int r = static_cast<int>(239 + t * (8 - 239));
    const int g = static_cast<int>(243 + t * (81 - 243));
    const int b = static_cast<int>(255 + t * (156 - 255));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

void save_ranking_svg(const GcRanking& ranking, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write chart '" + path + "'");

    const int n = static_cast<int>(ranking.scores.size());
    const int bar_h = 18, gap = 6, top = 34, left = 190, bar_area = 380, right_pad = 70;
    const int width = left + bar_area + right_pad;
    const int height = top + n * (bar_h + gap) + 16;

    double max_g = 0.0;
    for (const auto& s : ranking.scores) max_g = std::max(max_g, s.g);
    const double scale = max_g > 0.0 ? bar_area / max_g : 0.0;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" "
           "font-weight=\"bold\">Granger causality score by predictor</text>\n";
    for (int i = 0; i < n; ++i) {
        const auto& s = ranking.scores[static_cast<std::size_t>(i)];
        const int y = top + i * (bar_h + gap);
        const double w = s.g * scale;
        out << "  <text x=\"" << left - 8 << "\" y=\"" << y + bar_h - 5
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
            << escape_xml(s.feature) << "</text>\n";
        out << "  <rect x=\"" << left << "\" y=\"" << y << "\" width=\"" << fmt(w)
            << "\" height=\"" << bar_h << "\" fill=\"#3182bd\"/>\n";
        out << "  <text x=\"" << left + w + 6 << "\" y=\"" << y + bar_h - 5
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(s.g, "%.4g")
            << "</text>\n";
    }
    out << "</svg>\n";
}

void save_confusion_svg(const NormalizedConfusion& cm, const std::string& title,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write chart '" + path + "'");

    const int cell = 90, left = 90, top = 56, bottom = 54;
    const int width = left + kNumClasses * cell + 30;
    const int height = top + kNumClasses * cell + bottom;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"14\" font-weight=\"bold\" text-anchor=\"middle\">"
        << escape_xml(title) << "</text>\n";

    for (int i = 0; i < kNumClasses; ++i) {
        for (int j = 0; j < kNumClasses; ++j) {
            const double v = cm.rates(i, j);
            const int x = left + j * cell;
            const int y = top + i * cell;
            out << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << heat_color(v)
                << "\" stroke=\"#555\"/>\n";
            out << "  <text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 5
                << "\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\" "
                   "fill=\""
                << (v > 0.5 ? "white" : "black") << "\">" << fmt(v, "%.2f") << "</text>\n";
        }
        out << "  <text x=\"" << left - 10 << "\" y=\"" << top + i * cell + cell / 2 + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
            << severity_name(static_cast<Severity>(i)) << "</text>\n";
        out << "  <text x=\"" << left + i * cell + cell / 2 << "\" y=\""
            << top + kNumClasses * cell + 18
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
            << severity_name(static_cast<Severity>(i)) << "</text>\n";
    }
    out << "  <text x=\"" << left - 56 << "\" y=\"" << top + (kNumClasses * cell) / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 " << left - 56
        << ' ' << top + (kNumClasses * cell) / 2 << ")\" text-anchor=\"middle\">True class</text>\n";
    out << "  <text x=\"" << left + (kNumClasses * cell) / 2 << "\" y=\""
        << top + kNumClasses * cell + 40
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">Predicted "
           "class</text>\n";
    out << "</svg>\n";
}

}  // namespace crashsev
