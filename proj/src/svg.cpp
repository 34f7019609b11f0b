#include "bsr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bsr/metrics.hpp"
#include "bsr/util.hpp"

namespace bsr {

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Linear ramp from light to dark blue over [0,1], clamped.
std::string score_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    auto mix = [&](int lo, int hi) { return static_cast<int>(std::lround(lo + (hi - lo) * v)); };
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", mix(0xf7, 0x08), mix(0xfb, 0x30),
                  mix(0xff, 0x6b));
    return buf;
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#e377c2"};

struct Svg {
    std::ostringstream out;

    void open(double width, double height) {
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
            << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " "
            << fmt(height) << "\" font-family=\"sans-serif\">\n";
        out << "<rect width=\"" << fmt(width) << "\" height=\"" << fmt(height)
            << "\" fill=\"white\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "#cccccc") {
        out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
            << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
            << "\"/>\n";
    }

    void text(double x, double y, const std::string& content, double size = 12,
              const std::string& anchor = "middle", const std::string& fill = "#000000",
              const std::string& extra = "") {
        out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << fmt(size)
            << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\"" << extra << ">"
            << xml_escape(content) << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0) {
        out << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
            << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
            << fmt(width) << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        out << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
            << "\" fill=\"" << fill << "\"/>\n";
    }

    std::string close() {
        out << "</svg>\n";
        return out.str();
    }
};

}  // namespace

std::string render_heatmap(const HeatmapData& data) {
    const double cell_w = 84, cell_h = 30;
    const double left = 150, top = 70, right_pad = 20, bottom_pad = 40;
    const std::size_t n_rows = data.row_labels.size();
    const std::size_t n_cols = data.col_labels.size();
    const double width = left + n_cols * cell_w + right_pad;
    const double height = top + n_rows * cell_h + bottom_pad;

    Svg svg;
    svg.open(width, height);
    svg.text(width / 2, 24, data.title, 15, "middle", "#000000", " font-weight=\"bold\"");
    svg.text(left + n_cols * cell_w / 2, 46, data.col_axis, 12);
    svg.text(14, top + n_rows * cell_h / 2, data.row_axis, 12, "middle", "#000000",
             " transform=\"rotate(-90 14 " + fmt(top + n_rows * cell_h / 2) + ")\"");

    for (std::size_t c = 0; c < n_cols; ++c) {
        svg.text(left + (c + 0.5) * cell_w, top - 6, data.col_labels[c], 11);
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        svg.text(left - 6, top + (r + 0.5) * cell_h + 4, data.row_labels[r], 11, "end");
    }

    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double x = left + c * cell_w;
            const double y = top + r * cell_h;
            const auto& cell = data.cells[r][c];
            if (!cell.has_value()) {
                svg.rect(x, y, cell_w, cell_h, "#eeeeee");
                svg.text(x + cell_w / 2, y + cell_h / 2 + 4, "n/a", 11, "middle", "#999999");
                continue;
            }
            svg.rect(x, y, cell_w, cell_h, score_color(*cell));
            const std::string label_color = *cell > 0.55 ? "#ffffff" : "#000000";
            svg.text(x + cell_w / 2, y + cell_h / 2 + 4, format_metric(*cell), 11, "middle",
                     label_color);
        }
    }
    return svg.close();
}

namespace {

double map_x(double x, bool log_x, double lo, double hi, double px_lo, double px_hi) {
    if (log_x) {
        x = std::log10(x);
        lo = std::log10(lo);
        hi = std::log10(hi);
    }
    if (hi <= lo) return (px_lo + px_hi) / 2;
    return px_lo + (x - lo) / (hi - lo) * (px_hi - px_lo);
}

}  // namespace

std::string render_line_chart(const LineChartData& data) {
    const double width = 680, height = 420;
    const double left = 70, right = width - 30, top = 60, bottom = height - 58;

    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool first = true;
    for (const auto& series : data.series) {
        for (const auto& [x, y] : series.points) {
            if (first) {
                x_lo = x_hi = x;
                first = false;
            }
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    // Metric charts read better on a stable [0,1] vertical scale.
    y_lo = std::min(y_lo, 0.0);
    y_hi = std::max(y_hi, 1.0);
    if (x_hi == x_lo) x_hi = x_lo + 1;

    auto px = [&](double x) { return map_x(x, data.log_x, x_lo, x_hi, left, right); };
    auto py = [&](double y) { return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top); };

    Svg svg;
    svg.open(width, height);
    svg.text(width / 2, 26, data.title, 15, "middle", "#000000", " font-weight=\"bold\"");
    svg.line(left, top, left, bottom, "#000000");
    svg.line(left, bottom, right, bottom, "#000000");
    svg.text((left + right) / 2, height - 16, data.x_axis, 12);
    svg.text(20, (top + bottom) / 2, data.y_axis, 12, "middle", "#000000",
             " transform=\"rotate(-90 20 " + fmt((top + bottom) / 2) + ")\"");

    for (int i = 0; i <= 5; ++i) {
        const double y = y_lo + (y_hi - y_lo) * i / 5;
        svg.line(left - 4, py(y), right, py(y), i == 0 ? "#000000" : "#dddddd");
        svg.text(left - 8, py(y) + 4, fmt(y), 10, "end");
    }
    if (data.log_x) {
        for (double x = std::pow(10, std::ceil(std::log10(x_lo)));
             x <= x_hi * 1.0001 && x_lo > 0; x *= 10) {
            svg.line(px(x), bottom, px(x), bottom + 4, "#000000");
            svg.text(px(x), bottom + 18, fmt(x), 10);
        }
    } else {
        for (int i = 0; i <= 5; ++i) {
            const double x = x_lo + (x_hi - x_lo) * i / 5;
            svg.line(px(x), bottom, px(x), bottom + 4, "#000000");
            svg.text(px(x), bottom + 18, fmt(x), 10);
        }
    }

    double legend_y = top + 4;
    for (std::size_t s = 0; s < data.series.size(); ++s) {
        const auto& series = data.series[s];
        const std::string color = kSeriesColors[s % (sizeof(kSeriesColors) / sizeof(char*))];
        std::ostringstream path;
        for (std::size_t i = 0; i < series.points.size(); ++i) {
            path << (i == 0 ? "M" : "L") << fmt(px(series.points[i].first)) << " "
                 << fmt(py(series.points[i].second)) << " ";
        }
        svg.out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"2\"/>\n";
        for (const auto& [x, y] : series.points) svg.circle(px(x), py(y), 2.5, color);

        svg.line(right - 120, legend_y, right - 96, legend_y, color, 2);
        svg.text(right - 90, legend_y + 4, series.name, 11, "start");
        legend_y += 16;
    }
    return svg.close();
}

}  // namespace bsr
