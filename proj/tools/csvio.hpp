#ifndef QLEAD_TOOLS_CSVIO_HPP
#define QLEAD_TOOLS_CSVIO_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcsv {

// Locale-independent numeric formatting ('.' decimal separator, stable
// precision) so identical configs produce byte-identical files.
inline std::string num(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class Writer {
  public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_)
            throw std::runtime_error("cannot open output file: " + path.string());
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0)
                out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

} // namespace qcsv

#endif
