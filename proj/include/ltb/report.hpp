#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltb {

// round-trip-safe double formatting: 17 significant digits, '.' separator
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_csv() const {
        std::string out;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out += columns[i];
            out += (i + 1 == columns.size()) ? '\n' : ',';
        }
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out += fmt_g17(row[i]);
                out += (i + 1 == row.size()) ? '\n' : ',';
            }
        }
        return out;
    }

    // two-column gnuplot data file: x column vs named column
    std::string to_plot_dat(const std::string& x_col, const std::string& y_col) const {
        std::size_t xi = npos_of(x_col), yi = npos_of(y_col);
        std::string out;
        for (const auto& row : rows) out += fmt_g17(row[xi]) + " " + fmt_g17(row[yi]) + "\n";
        return out;
    }

private:
    std::size_t npos_of(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::invalid_argument("Table: no column named " + name);
    }
};

inline void write_file(const std::filesystem::path& path, const std::string& body) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
}

} // namespace ltb
