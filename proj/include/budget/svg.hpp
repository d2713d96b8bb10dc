#pragma once

#include <string>
#include <vector>

namespace budget {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool points_only = false;  // scatter instead of polyline
};

// Minimal dependency-free SVG line/scatter chart (640x480, fixed layout).
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

}  // namespace budget
