#ifndef DMCOUNT_GRID_HPP
#define DMCOUNT_GRID_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "dmcount/random.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

/// Nonnegative real-valued 2D grid (people per pixel). Entries are validated
/// to be finite and >= 0 on construction.
template <typename Scalar>
struct DensityMapT {
  GridArray<Scalar> values;

  DensityMapT() = default;

  explicit DensityMapT(GridArray<Scalar> v) : values(std::move(v)) {
    if (values.rows() < 1 || values.cols() < 1)
      throw std::invalid_argument("density map: extent must be >= 1x1");
    if (!values.isFinite().all())
      throw std::invalid_argument("density map: non-finite entry");
    if ((values < Scalar(0)).any())
      throw std::invalid_argument("density map: negative entry");
  }

  static DensityMapT zeros(Eigen::Index rows, Eigen::Index cols) {
    return DensityMapT(GridArray<Scalar>::Zero(rows, cols));
  }

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  Eigen::Index size() const { return values.size(); }
};

/// Head-point annotation: (row, col) coordinates inside [0, rows) x [0, cols).
/// The list may be empty (zero-count image).
template <typename Scalar>
struct DotAnnotationT {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<Eigen::Matrix<Scalar, 2, 1>> points;

  DotAnnotationT() = default;

  DotAnnotationT(Eigen::Index rows_, Eigen::Index cols_,
                 std::vector<Eigen::Matrix<Scalar, 2, 1>> pts)
      : rows(rows_), cols(cols_), points(std::move(pts)) {
    if (rows < 1 || cols < 1)
      throw std::invalid_argument("annotation: extent must be >= 1x1");
    for (const auto& p : points) {
      if (!(p[0] >= Scalar(0) && p[0] < Scalar(rows) && p[1] >= Scalar(0) &&
            p[1] < Scalar(cols)))
        throw std::invalid_argument("annotation: point out of bounds");
    }
  }

  Eigen::Index count() const {
    return static_cast<Eigen::Index>(points.size());
  }
};

using DensityMap = DensityMapT<double>;
using DotAnnotation = DotAnnotationT<double>;

/// Sum of all entries (the count held by the map).
template <typename Scalar>
Scalar total_mass(const DensityMapT<Scalar>& m) {
  return m.values.sum();
}

namespace detail {

// Nearest valid pixel of a real coordinate; half-way cases round away from
// zero, results are clamped so coordinates just below the upper bound stay
// on the grid.
template <typename Scalar>
Eigen::Index nearest_pixel(Scalar coord, Eigen::Index extent) {
  const auto p = static_cast<Eigen::Index>(std::llround(coord));
  return std::clamp<Eigen::Index>(p, 0, extent - 1);
}

}  // namespace detail

/// Binary dot map: adds 1 at the nearest pixel of every point, accumulating
/// coincident points. Total mass equals the point count exactly.
template <typename Scalar>
DensityMapT<Scalar> rasterize(const DotAnnotationT<Scalar>& ann) {
  GridArray<Scalar> out = GridArray<Scalar>::Zero(ann.rows, ann.cols);
  for (const auto& p : ann.points) {
    out(detail::nearest_pixel(p[0], ann.rows),
        detail::nearest_pixel(p[1], ann.cols)) += Scalar(1);
  }
  return DensityMapT<Scalar>(std::move(out));
}

/// m / (|m|_1 + eps_mach). The all-zero map maps to the all-zero map; this is
/// a documented outcome, not an error.
template <typename Scalar>
DensityMapT<Scalar> normalize(const DensityMapT<Scalar>& m) {
  const Scalar mass = total_mass(m);
  return DensityMapT<Scalar>(m.values / (mass + machine_epsilon<Scalar>()));
}

/// Displaces each point by an independent uniform offset in
/// [-max_fraction*rows, +max_fraction*rows] per axis (image height sets the
/// noise scale on both axes), then clamps back into bounds. Deterministic
/// per seed; point count preserved.
template <typename Scalar>
DotAnnotationT<Scalar> perturb_annotation(const DotAnnotationT<Scalar>& ann,
                                          Scalar max_fraction,
                                          std::uint64_t seed) {
  if (!(max_fraction >= Scalar(0) && max_fraction <= Scalar(1)))
    throw std::invalid_argument("perturb_annotation: max_fraction not in [0,1]");
  std::mt19937_64 rng(seed);
  const Scalar amp = max_fraction * static_cast<Scalar>(ann.rows);
  const Scalar row_hi = std::nextafter(static_cast<Scalar>(ann.rows), Scalar(0));
  const Scalar col_hi = std::nextafter(static_cast<Scalar>(ann.cols), Scalar(0));
  std::vector<Eigen::Matrix<Scalar, 2, 1>> pts;
  pts.reserve(ann.points.size());
  for (const auto& p : ann.points) {
    const Scalar dr = uniform<Scalar>(rng, -amp, amp);
    const Scalar dc = uniform<Scalar>(rng, -amp, amp);
    pts.push_back({std::clamp(p[0] + dr, Scalar(0), row_hi),
                   std::clamp(p[1] + dc, Scalar(0), col_hi)});
  }
  return DotAnnotationT<Scalar>(ann.rows, ann.cols, std::move(pts));
}

}  // namespace dmcount

#endif  // DMCOUNT_GRID_HPP
