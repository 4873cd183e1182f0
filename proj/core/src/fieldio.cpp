#include "manidyn/fieldio.hpp"

#include <cstdio>
#include <fstream>

#include "manidyn/errors.hpp"

namespace manidyn {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    return out;
}

void write_header(std::ofstream& out, const BodyGrid& grid,
                  const std::vector<std::string>& names) {
    out << "t";
    for (int a = 0; a < grid.dim(); ++a) out << " x" << (a + 1);
    for (const auto& n : names) out << " " << n;
    out << "\n";
}

void write_rows(std::ofstream& out, const BodyGrid& grid, const Mat& field, double t) {
    for (int p = 0; p < grid.points(); ++p) {
        out << format_value(t);
        Vec x = grid.coord(p);
        for (int a = 0; a < grid.dim(); ++a) out << " " << format_value(x[a]);
        for (int c = 0; c < field.cols(); ++c) out << " " << format_value(field(p, c));
        out << "\n";
    }
}

}  // namespace

void write_motion(const std::string& path, const Motion& motion) {
    std::vector<std::string> names;
    for (int i = 0; i < motion.space_dim(); ++i) names.push_back("y" + std::to_string(i + 1));
    write_field(path, motion.grid, names, motion.slices, motion.dt);
}

void write_slice_field(const std::string& path, const BodyGrid& grid,
                       const std::vector<std::string>& names, const Mat& field, double t) {
    auto out = open_out(path);
    write_header(out, grid, names);
    write_rows(out, grid, field, t);
}

void write_field(const std::string& path, const BodyGrid& grid,
                 const std::vector<std::string>& names, const std::vector<Mat>& slices,
                 double dt) {
    auto out = open_out(path);
    write_header(out, grid, names);
    for (std::size_t t = 0; t < slices.size(); ++t)
        write_rows(out, grid, slices[t], static_cast<double>(t) * dt);
}

}  // namespace manidyn
