#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bsr {

// Grid of metric values keyed by row/column labels. Cells may be absent
// (no data for that combination); those render greyed out.
struct HeatmapData {
    std::string title;
    std::string row_axis;
    std::string col_axis;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    // cells[r][c], same shape as row_labels x col_labels
    std::vector<std::vector<std::optional<double>>> cells;
};

// One polyline on a line chart.
struct LineSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y), ascending x
};

struct LineChartData {
    std::string title;
    std::string x_axis;
    std::string y_axis;
    std::vector<LineSeries> series;
    bool log_x = false;  // plot x on a log10 scale (useful for beta sweeps)
};

// Both renderers return a complete standalone SVG document. Cell and
// point labels are formatted with format_metric so they match the CSV
// output byte for byte.
std::string render_heatmap(const HeatmapData& data);
std::string render_line_chart(const LineChartData& data);

}  // namespace bsr
