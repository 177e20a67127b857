#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace streamfdr {

// Minimal SVG line plots; a convenience view on the CSV output, nothing more.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

inline void write_svg_lineplot(const std::string& path, const std::vector<SvgSeries>& series,
                               const std::string& title, const std::string& xlabel,
                               const std::string& ylabel) {
    const double W = 720, H = 480, L = 70, R = 160, T = 40, B = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad; ymax += ypad;
    auto sx = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
    auto sy = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    std::ofstream os(path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='15'>" << title
       << "</text>\n";
    os << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='" << H - B
       << "' stroke='black'/>\n";
    os << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
       << "' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        double fx = xmin + (xmax - xmin) * i / 5.0;
        double fy = ymin + (ymax - ymin) * i / 5.0;
        os << "<text x='" << sx(fx) << "' y='" << H - B + 18
           << "' text-anchor='middle' font-size='11'>" << fx << "</text>\n";
        os << "<text x='" << L - 6 << "' y='" << sy(fy) + 4
           << "' text-anchor='end' font-size='11'>" << fy << "</text>\n";
    }
    os << "<text x='" << (L + W - R) / 2 << "' y='" << H - 10
       << "' text-anchor='middle' font-size='12'>" << xlabel << "</text>\n";
    os << "<text x='16' y='" << (T + H - B) / 2
       << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 " << (T + H - B) / 2
       << ")'>" << ylabel << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* col = colors[si % 8];
        os << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
        os << "'/>\n";
        double ly = T + 16 + 16 * static_cast<double>(si);
        os << "<line x1='" << W - R + 10 << "' y1='" << ly << "' x2='" << W - R + 30 << "' y2='"
           << ly << "' stroke='" << col << "' stroke-width='2'/>\n";
        os << "<text x='" << W - R + 35 << "' y='" << ly + 4 << "' font-size='11'>" << s.label
           << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace streamfdr
