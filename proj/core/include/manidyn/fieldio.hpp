#pragma once

#include <string>
#include <vector>

#include "manidyn/kinematics.hpp"

namespace manidyn {

/// Columnar plain-text export, one header row naming the columns and one row
/// per (time, grid point). Values print with 17 significant digits so
/// repeated runs are byte-identical.
///
/// Motions:   t x1 [x2] y1 .. ym
/// Fields:    t x1 [x2] <name1> .. <namek>
void write_motion(const std::string& path, const Motion& motion);

void write_slice_field(const std::string& path, const BodyGrid& grid,
                       const std::vector<std::string>& names, const Mat& field,
                       double t = 0.0);

void write_field(const std::string& path, const BodyGrid& grid,
                 const std::vector<std::string>& names, const std::vector<Mat>& slices,
                 double dt);

std::string format_value(double v);

}  // namespace manidyn
