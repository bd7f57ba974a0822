#pragma once

#include <string>
#include <vector>

#include "blobflow/common.hpp"

namespace blob::io {

const char* version();

void write_text(const std::string& path, const std::string& content);

/// CSV with a fixed header; numbers rendered with %.17g so identical runs are
/// bit-identical.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_num(double v);

struct Series {
    std::string label;
    std::vector<double> x, y;
};

/// Minimal hand-rolled SVG line plot (log-free axes, autoscaled).
std::string svg_line_plot(const std::string& title, const std::vector<Series>& series);

/// Particle histogram against an exact density curve.
std::string svg_density_plot(const std::string& title, const Vec& particles,
                             const std::vector<double>& curve_x,
                             const std::vector<double>& curve_y, int bins = 40);

void ensure_dir(const std::string& path);

}  // namespace blob::io
