#pragma once

#include <string>
#include <vector>

namespace abmphase::svg {

struct Series {
    std::vector<double> x, y;
    // optional per-point color values; empty means a fixed color
    std::vector<double> color;
    std::string fixed_color = "#1f77b4";
    bool line = false;  // scatter by default
    double marker_radius = 2.0;
    std::string label;
};

struct Figure {
    std::string title;
    std::string x_label, y_label;
    std::vector<Series> series;
    int width = 640;
    int height = 480;
    std::string colorbar_label;
};

// Writes a self-contained SVG scatter/line figure. Color values are mapped
// through a viridis-like gradient.
void write_figure(const std::string& path, const Figure& fig);

// Simple vertical bar chart (used for residual spectra).
void write_bars(const std::string& path, const std::string& title,
                const std::vector<std::string>& labels, const std::vector<double>& values);

}  // namespace abmphase::svg
