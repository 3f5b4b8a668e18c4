#pragma once

#include <string>
#include <vector>

#include "hs/grid.hpp"

namespace hs {

/// Shortest 17-significant-digit decimal form of a double.
std::string fmt17(double v);

/// Writes base.csv (coordinates then per-channel re/im columns) and base.json
/// (grid metadata). Loaders consume the pair.
void save_field(const BoundaryField& f, const std::string& base);
BoundaryField load_field(const std::string& base);

void save_kernel(const KernelMatrix& k, const std::string& base);
KernelMatrix load_kernel(const std::string& base);

void save_halfspace_field(const HalfSpaceField& u, const std::string& base);
HalfSpaceField load_halfspace_field(const std::string& base);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Single polyline plot of (x, y) pairs as a static SVG.
void write_svg_curve(const std::string& path, const std::vector<double>& x,
                     const std::vector<double>& y, const std::string& title);

}  // namespace hs
