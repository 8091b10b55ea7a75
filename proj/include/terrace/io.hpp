#pragma once

#include "terrace/types.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace terrace {

/// 17 significant digits, '.' decimal separator, independent of the global locale.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Minimal comma-separated writer: one header row, then numeric or text cells.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header) : os_(os) {
        bool first = true;
        for (auto h : header) {
            if (!first) {
                os_ << ',';
            }
            os_ << h;
            first = false;
        }
        os_ << '\n';
        columns_ = header.size();
    }

    CsvWriter& cell(double v) {
        sep();
        os_ << format_double(v);
        return *this;
    }
    CsvWriter& cell(long long v) {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(bool v) { return cell(static_cast<long long>(v ? 1 : 0)); }
    CsvWriter& cell(std::string_view v) {
        sep();
        os_ << v;
        return *this;
    }

    void end_row() {
        os_ << '\n';
        in_row_ = 0;
    }

    std::size_t columns() const { return columns_; }

private:
    void sep() {
        if (in_row_++ > 0) {
            os_ << ',';
        }
    }

    std::ostream& os_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

/// Row-major 8-bit grayscale raster; row 0 is written first.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
    double min_value = 0.0;
    double max_value = 0.0;
};

/// Linear scaling of a row-major field between its own min and max.
/// Non-finite entries map to 0.
inline GrayImage to_gray(std::span<const double> field, std::size_t width, std::size_t height) {
    if (field.size() != width * height) {
        throw ValidationError("to_gray: field size does not match width*height");
    }
    GrayImage img{width, height, std::vector<std::uint8_t>(field.size(), 0), 0.0, 0.0};
    bool any = false;
    for (double v : field) {
        if (!std::isfinite(v)) {
            continue;
        }
        if (!any) {
            img.min_value = img.max_value = v;
            any = true;
        } else {
            img.min_value = std::min(img.min_value, v);
            img.max_value = std::max(img.max_value, v);
        }
    }
    const double span = img.max_value - img.min_value;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double v = field[i];
        if (!std::isfinite(v) || span <= 0.0) {
            continue;
        }
        const double s = (v - img.min_value) / span;
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0));
    }
    return img;
}

/// Binary PGM (P5). The scaling range is recorded in a header comment.
inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("cannot open " + path + " for writing");
    }
    os << "P5\n# min=" << format_double(img.min_value) << " max=" << format_double(img.max_value)
       << "\n"
       << img.width << ' ' << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             static_cast<std::streamsize>(img.pixels.size()));
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot open " + path + " for writing");
    }
    return os;
}

}  // namespace terrace
