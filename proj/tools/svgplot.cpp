#include "svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qplot {

namespace {

constexpr int kWidth = 820;
constexpr int kHeight = 560;
constexpr int kMarginL = 70, kMarginR = 160, kMarginT = 40, kMarginB = 55;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmin < xmax)) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (!(ymin < ymax)) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double xpad = 0.02 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    const auto X = [&](double x) {
        return kMarginL + (x - xmin) / (xmax - xmin) * (kWidth - kMarginL - kMarginR);
    };
    const auto Y = [&](double y) {
        return kHeight - kMarginB - (y - ymin) / (ymax - ymin) * (kHeight - kMarginT - kMarginB);
    };

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open plot file: " + path.string());

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // Axes with 6 ticks per side.
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        out << "<line x1=\"" << X(xv) << "\" y1=\"" << Y(ymin) << "\" x2=\"" << X(xv)
            << "\" y2=\"" << Y(ymax) << "\" stroke=\"#ddd\"/>\n";
        out << "<line x1=\"" << X(xmin) << "\" y1=\"" << Y(yv) << "\" x2=\"" << X(xmax)
            << "\" y2=\"" << Y(yv) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << X(xv) << "\" y=\"" << kHeight - kMarginB + 18
            << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
        out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << Y(yv) + 4
            << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
    }
    out << "</g>\n";
    out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
        << kWidth - kMarginL - kMarginR << "\" height=\"" << kHeight - kMarginT - kMarginB
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << kHeight / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % (sizeof kColors / sizeof kColors[0])];
        out << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" d=\"";
        bool pen_down = false;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                pen_down = false;
                continue;
            }
            out << (pen_down ? 'L' : 'M') << fmt(X(s.x[i])) << ' ' << fmt(Y(s.y[i])) << ' ';
            pen_down = true;
        }
        out << "\"/>\n";
        const double ly = kMarginT + 16.0 + 18.0 * static_cast<double>(si);
        out << "<line x1=\"" << kWidth - kMarginR + 10 << "\" y1=\"" << ly << "\" x2=\""
            << kWidth - kMarginR + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - kMarginR + 40 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace qplot
