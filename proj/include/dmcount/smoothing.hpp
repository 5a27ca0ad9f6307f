#ifndef DMCOUNT_SMOOTHING_HPP
#define DMCOUNT_SMOOTHING_HPP

#include <algorithm>
#include <cmath>

#include "dmcount/grid.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

/// Truncated Gaussian kernel parameters. The default truncation radius is
/// ceil(3 sigma); entries are renormalized after truncation and boundary
/// clipping so each stamped kernel carries exactly unit mass.
template <typename Scalar>
struct KernelSpecT {
  Scalar sigma;
  int radius;

  explicit KernelSpecT(Scalar sigma_, int radius_ = 0)
      : sigma(sigma_),
        radius(radius_ > 0 ? radius_
                           : static_cast<int>(std::ceil(Scalar(3) * sigma_))) {
    if (!(sigma > Scalar(0)))
      throw std::invalid_argument("kernel spec: sigma must be > 0");
    if (radius < 1) radius = 1;
  }
};

using KernelSpec = KernelSpecT<double>;

namespace detail {

// Stamps one unit-mass Gaussian centered at the nearest pixel of (pr, pc).
// The window is clipped to the grid and the in-bounds weights renormalized,
// so boundary dots still contribute exactly 1 to the total mass.
template <typename Scalar>
void stamp_kernel(GridArray<Scalar>& out, Scalar pr, Scalar pc,
                  const KernelSpecT<Scalar>& spec) {
  const Eigen::Index rows = out.rows();
  const Eigen::Index cols = out.cols();
  const Eigen::Index cr = nearest_pixel(pr, rows);
  const Eigen::Index cc = nearest_pixel(pc, cols);
  const Eigen::Index r0 = std::max<Eigen::Index>(cr - spec.radius, 0);
  const Eigen::Index r1 = std::min<Eigen::Index>(cr + spec.radius, rows - 1);
  const Eigen::Index c0 = std::max<Eigen::Index>(cc - spec.radius, 0);
  const Eigen::Index c1 = std::min<Eigen::Index>(cc + spec.radius, cols - 1);

  const Scalar inv_two_sigma2 =
      Scalar(1) / (Scalar(2) * spec.sigma * spec.sigma);
  GridArray<Scalar> window(r1 - r0 + 1, c1 - c0 + 1);
  for (Eigen::Index r = r0; r <= r1; ++r)
    for (Eigen::Index c = c0; c <= c1; ++c) {
      const Scalar dr = static_cast<Scalar>(r - cr);
      const Scalar dc = static_cast<Scalar>(c - cc);
      window(r - r0, c - c0) = std::exp(-(dr * dr + dc * dc) * inv_two_sigma2);
    }
  out.block(r0, c0, window.rows(), window.cols()) += window / window.sum();
}

}  // namespace detail

/// Gaussian pseudo ground truth with one fixed kernel width: the sum of
/// unit-mass truncated Gaussians, one per dot. Total mass equals the dot
/// count up to rounding.
template <typename Scalar>
DensityMapT<Scalar> smooth_fixed(const DotAnnotationT<Scalar>& ann,
                                 const KernelSpecT<Scalar>& spec) {
  GridArray<Scalar> out = GridArray<Scalar>::Zero(ann.rows, ann.cols);
  for (const auto& p : ann.points)
    detail::stamp_kernel(out, p[0], p[1], spec);
  return DensityMapT<Scalar>(std::move(out));
}

/// Geometry-adaptive variant: per dot, sigma_i = beta * (mean distance to
/// its min(k, N-1) nearest other dots), floored at 1 pixel. A single dot
/// falls back to sigma = 8.
template <typename Scalar>
DensityMapT<Scalar> smooth_adaptive(const DotAnnotationT<Scalar>& ann,
                                    int k, Scalar beta) {
  const Eigen::Index n_dots = ann.count();
  if (n_dots < 1) throw EmptyAnnotation("smooth_adaptive: no dots");
  if (k < 1) throw std::invalid_argument("smooth_adaptive: k must be >= 1");

  GridArray<Scalar> out = GridArray<Scalar>::Zero(ann.rows, ann.cols);
  std::vector<Scalar> dists;
  dists.reserve(static_cast<std::size_t>(n_dots));
  for (Eigen::Index i = 0; i < n_dots; ++i) {
    Scalar sigma = Scalar(8);
    if (n_dots > 1) {
      dists.clear();
      for (Eigen::Index j = 0; j < n_dots; ++j) {
        if (j == i) continue;
        dists.push_back((ann.points[i] - ann.points[j]).norm());
      }
      const auto take = std::min<std::size_t>(static_cast<std::size_t>(k),
                                              dists.size());
      std::partial_sort(dists.begin(), dists.begin() + take, dists.end());
      Scalar mean = Scalar(0);
      for (std::size_t t = 0; t < take; ++t) mean += dists[t];
      sigma = std::max(beta * mean / static_cast<Scalar>(take), Scalar(1));
    }
    detail::stamp_kernel(out, ann.points[i][0], ann.points[i][1],
                         KernelSpecT<Scalar>(sigma));
  }
  return DensityMapT<Scalar>(std::move(out));
}

}  // namespace dmcount

#endif  // DMCOUNT_SMOOTHING_HPP
