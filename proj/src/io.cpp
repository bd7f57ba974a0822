#include "blobflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace blob::io {

const char* version() { return "blobflow 0.1.0"; }

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw evaluation_error("cannot create directory " + path + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw evaluation_error("cannot write " + path);
    out << content;
}

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_num(row[i]);
        out << "\n";
    }
    write_text(path, out.str());
}

namespace {

struct Extent {
    double lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
    void grow(double x, double y) {
        lo_x = std::min(lo_x, x);
        hi_x = std::max(hi_x, x);
        lo_y = std::min(lo_y, y);
        hi_y = std::max(hi_y, y);
    }
};

constexpr int kWidth = 640, kHeight = 400, kPad = 45;

double map_x(double x, const Extent& e) {
    return kPad + (x - e.lo_x) / (e.hi_x - e.lo_x + 1e-300) * (kWidth - 2 * kPad);
}
double map_y(double y, const Extent& e) {
    return kHeight - kPad - (y - e.lo_y) / (e.hi_y - e.lo_y + 1e-300) * (kHeight - 2 * kPad);
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_header(const std::string& title) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
    return s.str();
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::vector<Series>& series) {
    Extent e;
    bool first = true;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (first) {
                e = {s.x[i], s.x[i], s.y[i], s.y[i]};
                first = false;
            } else {
                e.grow(s.x[i], s.y[i]);
            }
        }
    std::ostringstream out;
    out << svg_header(title);
    out << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kWidth - 2 * kPad
        << "\" height=\"" << kHeight - 2 * kPad << "\" fill=\"none\" stroke=\"#888\"/>\n";
    int color = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << kColors[color % 6] << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            out << map_x(s.x[i], e) << "," << map_y(s.y[i], e) << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << kWidth - kPad - 5 << "\" y=\"" << kPad + 16 * (color + 1)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << kColors[color % 6] << "\">"
            << s.label << "</text>\n";
        ++color;
    }
    out << "<text x=\"" << kPad << "\" y=\"" << kHeight - 8 << "\" font-size=\"10\">x: ["
        << format_num(e.lo_x) << ", " << format_num(e.hi_x) << "]  y: [" << format_num(e.lo_y)
        << ", " << format_num(e.hi_y) << "]</text>\n</svg>\n";
    return out.str();
}

std::string svg_density_plot(const std::string& title, const Vec& particles,
                             const std::vector<double>& curve_x,
                             const std::vector<double>& curve_y, int bins) {
    const double lo = particles.minCoeff(), hi = particles.maxCoeff();
    const double width = (hi - lo) * 1.1 + 1e-12;
    const double start = lo - 0.05 * (hi - lo);
    const double h = width / bins;
    std::vector<double> count(bins, 0.0);
    for (Eigen::Index i = 0; i < particles.size(); ++i) {
        const int b = std::clamp(static_cast<int>((particles(i) - start) / h), 0, bins - 1);
        count[b] += 1.0 / (particles.size() * h);
    }
    Extent e{start, start + width, 0.0, 1e-12};
    for (double c : count) e.grow(start, c);
    for (size_t i = 0; i < curve_x.size(); ++i) e.grow(curve_x[i], curve_y[i]);

    std::ostringstream out;
    out << svg_header(title);
    for (int b = 0; b < bins; ++b) {
        const double x0 = map_x(start + b * h, e), x1 = map_x(start + (b + 1) * h, e);
        const double y = map_y(count[b], e), y0 = map_y(0.0, e);
        out << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << x1 - x0 << "\" height=\""
            << y0 - y << "\" fill=\"#9ecae1\" stroke=\"#6baed6\"/>\n";
    }
    if (!curve_x.empty()) {
        out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < curve_x.size(); ++i)
            out << map_x(curve_x[i], e) << "," << map_y(curve_y[i], e) << " ";
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace blob::io
