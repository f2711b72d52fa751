#ifndef QLEAD_TOOLS_SVGPLOT_HPP
#define QLEAD_TOOLS_SVGPLOT_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace qplot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y; // non-finite entries break the polyline
};

/// Minimal static line plot. Rendering is a convenience view of CSV data;
/// the CSV files remain the contract.
void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

} // namespace qplot

#endif
