#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sgnet/matrix.hpp"

namespace sgnet {

/// Colour-mapped image of a matrix, one square block per entry, values
/// clamped to [vmin, vmax]. 8-bit RGB PNG, no timestamp chunk.
void write_heatmap_png(const Matrix& m, double vmin, double vmax, const std::filesystem::path& file);

struct Series {
    std::string label;
    std::vector<double> y;  // plotted against 1..y.size()
};

/// Line chart as a standalone SVG document.
std::string line_chart_svg(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

}  // namespace sgnet
