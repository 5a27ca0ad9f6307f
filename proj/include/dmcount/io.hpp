#ifndef DMCOUNT_IO_HPP
#define DMCOUNT_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dmcount/grid.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest decimal form that round-trips a double; "inf" and "excluded"
/// mark infinite and undefined report values.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "excluded";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// --- density-map text format -------------------------------------------
// First line "P_DENS <rows> <cols>", then rows*cols whitespace-separated
// decimal reals in row-major order.

inline void write_density_map(std::ostream& os, const DensityMap& m) {
  os << "P_DENS " << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ' ';
      os << format_real(m.values(r, c));
    }
    os << '\n';
  }
  if (!os) throw IoError("density map: write failed");
}

inline DensityMap read_density_map(std::istream& is) {
  std::string magic;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> magic >> rows >> cols) || magic != "P_DENS")
    throw IoError("density map: expected 'P_DENS <rows> <cols>' header");
  if (rows < 1 || cols < 1) throw IoError("density map: bad extent");
  GridArray<double> g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!(is >> g(r, c)))
        throw IoError("density map: expected " + std::to_string(rows * cols) +
                      " values");
  try {
    return DensityMap(std::move(g));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("density map: ") + e.what());
  }
}

// --- annotation CSV ------------------------------------------------------
// Header "row,col", one "r,c" point per line. The grid extent is not part
// of the format; callers supply it when building a DotAnnotation.

inline void write_annotation_csv(std::ostream& os, const DotAnnotation& ann) {
  os << "row,col\n";
  for (const auto& p : ann.points)
    os << format_real(p[0]) << ',' << format_real(p[1]) << '\n';
  if (!os) throw IoError("annotation: write failed");
}

inline std::vector<Eigen::Vector2d> read_annotation_points(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("annotation: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "row,col")
    throw IoError("annotation: expected 'row,col' header, got '" + line + "'");
  std::vector<Eigen::Vector2d> pts;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw IoError("annotation: malformed line '" + line + "'");
    try {
      pts.emplace_back(std::stod(line.substr(0, comma)),
                       std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw IoError("annotation: malformed line '" + line + "'");
    }
  }
  return pts;
}

// --- binary PGM heatmap --------------------------------------------------

/// 8-bit binary PGM (magic P5, max value 255). Entries are scaled by
/// `scale` (the caller records it) and clamped into [0, 255].
inline void write_pgm(std::ostream& os, const GridArray<double>& values,
                      double scale) {
  os << "P5\n" << values.cols() << ' ' << values.rows() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(values.cols()));
  const double s = scale > 0 ? scale : 1.0;
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = std::clamp(values(r, c) / s, 0.0, 1.0);
      row[static_cast<std::size_t>(c)] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw IoError("pgm: write failed");
}

// --- file-path helpers ----------------------------------------------------

inline DensityMap load_density_map(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_density_map(is);
}

inline void save_density_map(const std::filesystem::path& path,
                             const DensityMap& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_density_map(os, m);
}

inline DotAnnotation load_annotation(const std::filesystem::path& path,
                                     Eigen::Index rows, Eigen::Index cols) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  auto pts = read_annotation_points(is);
  try {
    return DotAnnotation(rows, cols, std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void save_annotation(const std::filesystem::path& path,
                            const DotAnnotation& ann) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_annotation_csv(os, ann);
}

inline void save_pgm(const std::filesystem::path& path,
                     const GridArray<double>& values, double scale) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_pgm(os, values, scale);
}

}  // namespace dmcount

#endif  // DMCOUNT_IO_HPP
