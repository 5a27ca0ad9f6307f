#ifndef DMCOUNT_METRICS_HPP
#define DMCOUNT_METRICS_HPP

#include <cmath>
#include <span>
#include <vector>

#include "dmcount/grid.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

template <typename Scalar>
struct CountPairT {
  Scalar truth;
  Scalar predicted;
};

template <typename Scalar>
struct CountMetricsT {
  Scalar mae;
  Scalar rmse;
  Scalar nae;        // NaN when every pair was excluded
  int nae_excluded;  // pairs with truth = 0, skipped by NAE
};

using CountPair = CountPairT<double>;
using CountMetrics = CountMetricsT<double>;

/// MAE, RMSE and NAE over an image set. Zero-truth pairs are excluded from
/// NAE (and counted) rather than erroring; real datasets contain zero-count
/// images.
template <typename Scalar>
CountMetricsT<Scalar> count_metrics(std::span<const CountPairT<Scalar>> pairs) {
  if (pairs.empty()) throw EmptyInput("count_metrics: no pairs");
  Scalar abs_sum = Scalar(0);
  Scalar sq_sum = Scalar(0);
  Scalar nae_sum = Scalar(0);
  int nae_included = 0;
  for (const auto& p : pairs) {
    const Scalar d = std::abs(p.truth - p.predicted);
    abs_sum += d;
    sq_sum += d * d;
    if (p.truth > Scalar(0)) {
      nae_sum += d / p.truth;
      ++nae_included;
    }
  }
  const auto k = static_cast<Scalar>(pairs.size());
  CountMetricsT<Scalar> out;
  out.mae = abs_sum / k;
  out.rmse = std::sqrt(sq_sum / k);
  out.nae = nae_included > 0 ? nae_sum / static_cast<Scalar>(nae_included)
                             : std::numeric_limits<Scalar>::quiet_NaN();
  out.nae_excluded = static_cast<int>(pairs.size()) - nae_included;
  return out;
}

template <typename Scalar>
CountMetricsT<Scalar> count_metrics(
    const std::vector<CountPairT<Scalar>>& pairs) {
  return count_metrics(std::span<const CountPairT<Scalar>>(pairs));
}

namespace detail {

// Density maps have no fixed 255-style range; the joint max of both maps
// serves as the data range, which makes identical comparisons scale-invariant.
template <typename Scalar>
Scalar data_range(const DensityMapT<Scalar>& a, const DensityMapT<Scalar>& b) {
  return std::max({a.values.maxCoeff(), b.values.maxCoeff(),
                   machine_epsilon<Scalar>()});
}

}  // namespace detail

/// 10 log10(R^2 / MSE) with R the joint data range. Returns +inf when the
/// maps are identical (MSE = 0).
template <typename Scalar>
Scalar psnr(const DensityMapT<Scalar>& a, const DensityMapT<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw GridMismatch("psnr: extents differ");
  const Scalar mse =
      (a.values - b.values).square().sum() / static_cast<Scalar>(a.size());
  if (mse == Scalar(0)) return infinity<Scalar>();
  const Scalar r = detail::data_range(a, b);
  return Scalar(10) * std::log10(r * r / mse);
}

/// Mean local SSIM over all fully-interior 11x11 windows, Gaussian-weighted
/// with sigma 1.5 and the usual constants K1 = 0.01, K2 = 0.03. Data range
/// as in psnr.
template <typename Scalar>
Scalar ssim(const DensityMapT<Scalar>& a, const DensityMapT<Scalar>& b) {
  constexpr int kWin = 11;
  constexpr Scalar kSigma = Scalar(1.5);
  constexpr Scalar kK1 = Scalar(0.01);
  constexpr Scalar kK2 = Scalar(0.03);

  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw GridMismatch("ssim: extents differ");
  if (a.rows() < kWin || a.cols() < kWin)
    throw TooSmall("ssim: extent below the 11x11 window");

  Eigen::Matrix<Scalar, kWin, kWin> w;
  for (int r = 0; r < kWin; ++r)
    for (int c = 0; c < kWin; ++c) {
      const Scalar dr = static_cast<Scalar>(r - kWin / 2);
      const Scalar dc = static_cast<Scalar>(c - kWin / 2);
      w(r, c) = std::exp(-(dr * dr + dc * dc) / (Scalar(2) * kSigma * kSigma));
    }
  w /= w.sum();

  const Scalar range = detail::data_range(a, b);
  const Scalar c1 = (kK1 * range) * (kK1 * range);
  const Scalar c2 = (kK2 * range) * (kK2 * range);

  Scalar acc = Scalar(0);
  Eigen::Index windows = 0;
  for (Eigen::Index r = 0; r + kWin <= a.rows(); ++r) {
    for (Eigen::Index c = 0; c + kWin <= a.cols(); ++c) {
      const auto wa = a.values.block(r, c, kWin, kWin);
      const auto wb = b.values.block(r, c, kWin, kWin);
      const Scalar mu_a = (w.array() * wa).sum();
      const Scalar mu_b = (w.array() * wb).sum();
      const Scalar var_a = (w.array() * wa.square()).sum() - mu_a * mu_a;
      const Scalar var_b = (w.array() * wb.square()).sum() - mu_b * mu_b;
      const Scalar cov = (w.array() * wa * wb).sum() - mu_a * mu_b;
      const Scalar num =
          (Scalar(2) * mu_a * mu_b + c1) * (Scalar(2) * cov + c2);
      const Scalar den =
          (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      acc += num / den;
      ++windows;
    }
  }
  return acc / static_cast<Scalar>(windows);
}

}  // namespace dmcount

#endif  // DMCOUNT_METRICS_HPP
