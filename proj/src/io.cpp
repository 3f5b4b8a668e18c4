#include "hs/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hs/error.hpp"

namespace hs {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::BadInput, "cannot open for write: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::BadInput, "cannot open for read: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json grid_to_json(const BoundaryGrid& g) {
  return json{{"dim", g.dim}, {"R", g.R}, {"N", g.N}};
}

BoundaryGrid grid_from_json(const json& j) {
  return make_grid(j.at("dim").get<int>(), j.at("R").get<double>(), j.at("N").get<int>());
}

void append_coords(const BoundaryGrid& g, long node, std::string& row) {
  double x[2];
  g.node_coords(node, x);
  for (int d = 0; d < g.dim; ++d) {
    row += fmt17(x[d]);
    row += ',';
  }
}

std::vector<double> parse_csv_row(const std::string& line) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < line.size()) {
    size_t next = line.find(',', pos);
    if (next == std::string::npos) next = line.size();
    out.push_back(std::strtod(line.substr(pos, next - pos).c_str(), nullptr));
    pos = next + 1;
  }
  return out;
}

}  // namespace

void save_field(const BoundaryField& f, const std::string& base) {
  json hdr = {{"kind", "boundary_field"},
              {"grid", grid_to_json(f.grid)},
              {"channels", f.channels},
              {"csv", base + ".csv"}};
  write_text_file(base + ".json", hdr.dump(2) + "\n");

  std::string csv;
  for (int d = 0; d < f.grid.dim; ++d) csv += "x" + std::to_string(d) + ",";
  for (int c = 0; c < f.channels; ++c)
    csv += "c" + std::to_string(c) + "_re,c" + std::to_string(c) + "_im" +
           (c + 1 < f.channels ? "," : "");
  csv += '\n';
  const long n = f.grid.nodes();
  for (long k = 0; k < n; ++k) {
    std::string row;
    append_coords(f.grid, k, row);
    for (int c = 0; c < f.channels; ++c) {
      row += fmt17(f.at(k, c).real());
      row += ',';
      row += fmt17(f.at(k, c).imag());
      if (c + 1 < f.channels) row += ',';
    }
    csv += row;
    csv += '\n';
  }
  write_text_file(base + ".csv", csv);
}

BoundaryField load_field(const std::string& base) {
  json hdr = json::parse(read_text_file(base + ".json"));
  if (hdr.at("kind") != "boundary_field") fail(Err::BadInput, "not a boundary_field: " + base);
  BoundaryGrid g = grid_from_json(hdr.at("grid"));
  int channels = hdr.at("channels").get<int>();
  BoundaryField f = make_field(g, channels);

  std::istringstream in(read_text_file(base + ".csv"));
  std::string line;
  std::getline(in, line);  // header
  long k = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto vals = parse_csv_row(line);
    if (static_cast<int>(vals.size()) != g.dim + 2 * channels)
      fail(Err::BadInput, "bad csv row in " + base);
    for (int c = 0; c < channels; ++c)
      f.at(k, c) = cplx(vals[g.dim + 2 * c], vals[g.dim + 2 * c + 1]);
    ++k;
  }
  if (k != g.nodes()) fail(Err::BadInput, "csv row count mismatch in " + base);
  return f;
}

void save_kernel(const KernelMatrix& k, const std::string& base) {
  json hdr = {{"kind", "kernel"},
              {"grid", grid_to_json(k.grid)},
              {"M", k.M},
              {"t", k.t},
              {"profile", k.is_profile},
              {"csv", base + ".csv"}};
  write_text_file(base + ".json", hdr.dump(2) + "\n");

  std::string csv;
  for (int d = 0; d < k.grid.dim; ++d) csv += "x" + std::to_string(d) + ",";
  for (int a = 0; a < k.M; ++a)
    for (int b = 0; b < k.M; ++b) {
      csv += "k" + std::to_string(a) + std::to_string(b) + "_re,k" + std::to_string(a) +
             std::to_string(b) + "_im";
      if (a + 1 < k.M || b + 1 < k.M) csv += ',';
    }
  csv += '\n';
  const long n = k.grid.nodes();
  const int mm = k.M * k.M;
  for (long node = 0; node < n; ++node) {
    std::string row;
    append_coords(k.grid, node, row);
    for (int c = 0; c < mm; ++c) {
      row += fmt17(k.values[node * mm + c].real());
      row += ',';
      row += fmt17(k.values[node * mm + c].imag());
      if (c + 1 < mm) row += ',';
    }
    csv += row;
    csv += '\n';
  }
  write_text_file(base + ".csv", csv);
}

KernelMatrix load_kernel(const std::string& base) {
  json hdr = json::parse(read_text_file(base + ".json"));
  if (hdr.at("kind") != "kernel") fail(Err::BadInput, "not a kernel: " + base);
  BoundaryGrid g = grid_from_json(hdr.at("grid"));
  KernelMatrix k = make_kernel(g, hdr.at("M").get<int>(), hdr.at("t").get<double>());
  k.is_profile = hdr.at("profile").get<bool>();

  std::istringstream in(read_text_file(base + ".csv"));
  std::string line;
  std::getline(in, line);
  long node = 0;
  const int mm = k.M * k.M;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto vals = parse_csv_row(line);
    if (static_cast<int>(vals.size()) != g.dim + 2 * mm)
      fail(Err::BadInput, "bad csv row in " + base);
    for (int c = 0; c < mm; ++c)
      k.values[node * mm + c] = cplx(vals[g.dim + 2 * c], vals[g.dim + 2 * c + 1]);
    ++node;
  }
  if (node != g.nodes()) fail(Err::BadInput, "csv row count mismatch in " + base);
  return k;
}

void save_halfspace_field(const HalfSpaceField& u, const std::string& base) {
  json hdr = {{"kind", "halfspace_field"},
              {"grid", grid_to_json(u.grid)},
              {"heights", u.heights},
              {"channels", u.channels},
              {"csv", base + ".csv"}};
  write_text_file(base + ".json", hdr.dump(2) + "\n");

  std::string csv = "t,";
  for (int d = 0; d < u.grid.dim; ++d) csv += "x" + std::to_string(d) + ",";
  for (int c = 0; c < u.channels; ++c)
    csv += "c" + std::to_string(c) + "_re,c" + std::to_string(c) + "_im" +
           (c + 1 < u.channels ? "," : "");
  csv += '\n';
  const long n = u.grid.nodes();
  for (size_t s = 0; s < u.heights.size(); ++s)
    for (long k = 0; k < n; ++k) {
      std::string row = fmt17(u.heights[s]);
      row += ',';
      append_coords(u.grid, k, row);
      for (int c = 0; c < u.channels; ++c) {
        row += fmt17(u.at(static_cast<int>(s), k, c).real());
        row += ',';
        row += fmt17(u.at(static_cast<int>(s), k, c).imag());
        if (c + 1 < u.channels) row += ',';
      }
      csv += row;
      csv += '\n';
    }
  write_text_file(base + ".csv", csv);
}

HalfSpaceField load_halfspace_field(const std::string& base) {
  json hdr = json::parse(read_text_file(base + ".json"));
  if (hdr.at("kind") != "halfspace_field") fail(Err::BadInput, "not a halfspace_field: " + base);
  BoundaryGrid g = grid_from_json(hdr.at("grid"));
  std::vector<double> heights = hdr.at("heights").get<std::vector<double>>();
  int channels = hdr.at("channels").get<int>();
  HalfSpaceField u = make_halfspace_field(g, heights, channels);

  std::istringstream in(read_text_file(base + ".csv"));
  std::string line;
  std::getline(in, line);
  long row_idx = 0;
  const long n = g.nodes();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto vals = parse_csv_row(line);
    if (static_cast<int>(vals.size()) != 1 + g.dim + 2 * channels)
      fail(Err::BadInput, "bad csv row in " + base);
    int s = static_cast<int>(row_idx / n);
    long k = row_idx % n;
    for (int c = 0; c < channels; ++c)
      u.at(s, k, c) = cplx(vals[1 + g.dim + 2 * c], vals[1 + g.dim + 2 * c + 1]);
    ++row_idx;
  }
  if (row_idx != static_cast<long>(heights.size()) * n)
    fail(Err::BadInput, "csv row count mismatch in " + base);
  return u;
}

void write_svg_curve(const std::string& path, const std::vector<double>& x,
                     const std::vector<double>& y, const std::string& title) {
  if (x.size() != y.size() || x.empty()) fail(Err::BadInput, "svg curve needs matching points");
  const double W = 800, H = 400, pad = 50;
  double xmin = x[0], xmax = x[0], ymin = y[0], ymax = y[0];
  for (size_t i = 0; i < x.size(); ++i) {
    xmin = std::min(xmin, x[i]);
    xmax = std::max(xmax, x[i]);
    ymin = std::min(ymin, y[i]);
    ymax = std::max(ymax, y[i]);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double v) { return pad + (v - xmin) / (xmax - xmin) * (W - 2 * pad); };
  auto py = [&](double v) { return H - pad - (v - ymin) / (ymax - ymin) * (H - 2 * pad); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\">\n";
  svg += "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"20\" y=\"24\" font-family=\"monospace\" font-size=\"14\">" + title +
         "</text>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < x.size(); ++i) {
    svg += fmt17(px(x[i])) + "," + fmt17(py(y[i]));
    if (i + 1 < x.size()) svg += ' ';
  }
  svg += "\"/>\n</svg>\n";
  write_text_file(path, svg);
}

}  // namespace hs
