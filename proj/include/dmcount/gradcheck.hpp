#ifndef DMCOUNT_GRADCHECK_HPP
#define DMCOUNT_GRADCHECK_HPP

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dmcount/grid.hpp"
#include "dmcount/losses.hpp"
#include "dmcount/random.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

/// Central finite differences of a scalar loss with respect to every entry
/// of the map, re-evaluating the full operation at each perturbed input.
/// Independent of any analytic gradient path by construction.
template <typename Scalar>
GridArray<Scalar> central_diff_grad(
    const std::function<Scalar(const DensityMapT<Scalar>&)>& loss,
    const DensityMapT<Scalar>& at, Scalar step) {
  GridArray<Scalar> grad(at.rows(), at.cols());
  GridArray<Scalar> work = at.values;
  for (Eigen::Index r = 0; r < at.rows(); ++r) {
    for (Eigen::Index c = 0; c < at.cols(); ++c) {
      const Scalar saved = work(r, c);
      work(r, c) = saved + step;
      const Scalar up = loss(DensityMapT<Scalar>(work));
      work(r, c) = saved - step;
      const Scalar down = loss(DensityMapT<Scalar>(work));
      work(r, c) = saved;
      grad(r, c) = (up - down) / (Scalar(2) * step);
    }
  }
  return grad;
}

template <typename Scalar>
Scalar relative_l2_error(const GridArray<Scalar>& analytic,
                         const GridArray<Scalar>& numeric) {
  const Scalar denom = std::sqrt(numeric.square().sum());
  const Scalar dist = std::sqrt((analytic - numeric).square().sum());
  if (denom == Scalar(0)) return dist == Scalar(0) ? Scalar(0) : infinity<Scalar>();
  return dist / denom;
}

template <typename Scalar>
struct GradCheckCaseT {
  std::string loss;
  Scalar max_rel_error = Scalar(0);
  int cases = 0;
};

using GradCheckCase = GradCheckCaseT<double>;

namespace detail {

template <typename Scalar>
GridArray<Scalar> random_positive_grid(std::mt19937_64& rng, Eigen::Index rows,
                                       Eigen::Index cols) {
  GridArray<Scalar> g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      g(r, c) = uniform<Scalar>(rng, Scalar(0.5), Scalar(1.5));
  return g;
}

}  // namespace detail

/// Seeded finite-difference suite over random strictly-positive map pairs:
/// count, OT, TV, combined, pixel-wise L2 and Bayesian losses, reporting the
/// maximum relative L2 error per loss. Pairs are redrawn when an entry of
/// the TV kink variable sign(v) or a Bayesian posterior dot sits within
/// 1e-3 of its non-differentiable point, where finite differences say
/// nothing about the subgradient.
template <typename Scalar>
std::vector<GradCheckCaseT<Scalar>> run_gradient_suite(
    std::uint64_t seed, int cases, Eigen::Index rows, Eigen::Index cols,
    const DmCountConfigT<Scalar>& dm_cfg, const BayesianConfigT<Scalar>& bayes,
    Scalar step) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckCaseT<Scalar>> out = {
      {"count", Scalar(0), 0},        {"ot", Scalar(0), 0},
      {"tv", Scalar(0), 0},           {"dm_count", Scalar(0), 0},
      {"pixelwise_l2", Scalar(0), 0}, {"bayesian", Scalar(0), 0}};

  const auto record = [&](std::size_t slot, const GridArray<Scalar>& analytic,
                          const GridArray<Scalar>& numeric) {
    out[slot].max_rel_error = std::max(
        out[slot].max_rel_error, relative_l2_error(analytic, numeric));
    ++out[slot].cases;
  };

  for (int k = 0; k < cases; ++k) {
    DensityMapT<Scalar> z(detail::random_positive_grid<Scalar>(rng, rows, cols));
    DensityMapT<Scalar> zhat(
        detail::random_positive_grid<Scalar>(rng, rows, cols));
    const int n_dots = 3 + static_cast<int>(uniform01<Scalar>(rng) * 3);
    std::vector<Eigen::Matrix<Scalar, 2, 1>> pts;
    for (int d = 0; d < n_dots; ++d)
      pts.push_back({uniform<Scalar>(rng, Scalar(0), Scalar(rows)),
                     uniform<Scalar>(rng, Scalar(0), Scalar(cols))});
    const DotAnnotationT<Scalar> ann(rows, cols, std::move(pts));

    const auto kink_free = [&]() {
      const GridArray<Scalar> v =
          z.values / total_mass(z) - zhat.values / total_mass(zhat);
      if ((v.abs() <= Scalar(1e-3)).any()) return false;
      const auto post = bayesian_posteriors(ann, bayes);
      using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
      const Eigen::Map<const Vec> zv(zhat.values.data(), zhat.size());
      const Vec dots = post * zv;
      return ((dots.array() - Scalar(1)).abs() > Scalar(1e-3)).all();
    };
    while (!kink_free()) {
      z = DensityMapT<Scalar>(detail::random_positive_grid<Scalar>(rng, rows, cols));
      zhat = DensityMapT<Scalar>(
          detail::random_positive_grid<Scalar>(rng, rows, cols));
    }

    record(0, count_loss(z, zhat).grad,
           central_diff_grad<Scalar>(
               [&](const DensityMapT<Scalar>& m) {
                 return count_loss(z, m).value;
               },
               zhat, step));
    record(1, ot_loss(z, zhat, dm_cfg).grad,
           central_diff_grad<Scalar>(
               [&](const DensityMapT<Scalar>& m) {
                 return ot_loss(z, m, dm_cfg).value;
               },
               zhat, step));
    record(2, tv_loss(z, zhat).grad,
           central_diff_grad<Scalar>(
               [&](const DensityMapT<Scalar>& m) {
                 return tv_loss(z, m).value;
               },
               zhat, step));
    record(3, dm_count_loss(z, zhat, dm_cfg).grad,
           central_diff_grad<Scalar>(
               [&](const DensityMapT<Scalar>& m) {
                 return dm_count_loss(z, m, dm_cfg).value;
               },
               zhat, step));
    record(4, pixelwise_loss(z, zhat, PixelNorm::L2).grad,
           central_diff_grad<Scalar>(
               [&](const DensityMapT<Scalar>& m) {
                 return pixelwise_loss(z, m, PixelNorm::L2).value;
               },
               zhat, step));
    record(5, bayesian_loss(ann, zhat, bayes).grad,
           central_diff_grad<Scalar>(
               [&](const DensityMapT<Scalar>& m) {
                 return bayesian_loss(ann, m, bayes).value;
               },
               zhat, step));
  }
  return out;
}

}  // namespace dmcount

#endif  // DMCOUNT_GRADCHECK_HPP
