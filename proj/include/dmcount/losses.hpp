#ifndef DMCOUNT_LOSSES_HPP
#define DMCOUNT_LOSSES_HPP

#include <cmath>

#include "dmcount/grid.hpp"
#include "dmcount/ot.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

/// Scalar loss value plus its gradient with respect to the predicted map.
template <typename Scalar>
struct LossEvalT {
  Scalar value = Scalar(0);
  GridArray<Scalar> grad;
};

template <typename Scalar>
struct DmCountConfigT {
  Scalar lambda1 = Scalar(0.1);   // OT weight
  Scalar lambda2 = Scalar(0.01);  // TV weight
  SinkhornConfigT<Scalar> sinkhorn;
  Scalar cost_scale = Scalar(1);
};

template <typename Scalar>
struct BayesianConfigT {
  Scalar sigma = Scalar(8);  // Gaussian likelihood width in pixels
};

enum class PixelNorm { L1, L2 };

using LossEval = LossEvalT<double>;
using DmCountConfig = DmCountConfigT<double>;
using BayesianConfig = BayesianConfigT<double>;

namespace detail {

template <typename Scalar>
void check_same_extent(const DensityMapT<Scalar>& a,
                       const DensityMapT<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw GridMismatch("density map extents differ");
}

template <typename Scalar>
Scalar sign(Scalar v) {
  if (v > Scalar(0)) return Scalar(1);
  if (v < Scalar(0)) return Scalar(-1);
  return Scalar(0);  // subgradient choice: sign(0) = 0
}

}  // namespace detail

/// | |z|_1 - |zhat|_1 | with the constant sign(|zhat|_1 - |z|_1) gradient.
template <typename Scalar>
LossEvalT<Scalar> count_loss(const DensityMapT<Scalar>& z,
                             const DensityMapT<Scalar>& zhat) {
  detail::check_same_extent(z, zhat);
  const Scalar diff = total_mass(zhat) - total_mass(z);
  LossEvalT<Scalar> out;
  out.value = std::abs(diff);
  out.grad = GridArray<Scalar>::Constant(zhat.rows(), zhat.cols(),
                                         detail::sign(diff));
  return out;
}

/// OT loss between the normalized maps: <alpha*, z/|z|> + <beta*, zhat/|zhat|>
/// with duals from sinkhorn. The gradient treats the duals as constants
/// (envelope rule); the second term is a scalar broadcast over all entries.
///
/// `io_state`, when non-null, warm-starts sinkhorn from the stored duals and
/// receives the fresh solution; repeated calls on slowly-moving zhat then
/// converge in a few iterations each.
template <typename Scalar>
LossEvalT<Scalar> ot_loss(const DensityMapT<Scalar>& z,
                          const DensityMapT<Scalar>& zhat,
                          const DmCountConfigT<Scalar>& cfg,
                          OtSolutionT<Scalar>* io_state = nullptr) {
  detail::check_same_extent(z, zhat);
  const Scalar mass_z = total_mass(z);
  const Scalar mass_hat = total_mass(zhat);
  if (mass_z <= Scalar(0)) throw ZeroMass("ot_loss: |z|_1 = 0");
  if (mass_hat <= Scalar(0)) throw ZeroMass("ot_loss: |zhat|_1 = 0");

  const GridCostT<Scalar> cost{z.rows(), z.cols(), cfg.cost_scale};
  const DualPotentialsT<Scalar>* warm = nullptr;
  if (io_state != nullptr && io_state->duals.alpha.rows() == z.rows() &&
      io_state->duals.alpha.cols() == z.cols()) {
    warm = &io_state->duals;
  }
  OtSolutionT<Scalar> sol =
      sinkhorn(normalize(z), normalize(zhat), cost, cfg.sinkhorn, warm);

  LossEvalT<Scalar> out;
  out.value = sol.value;
  const Scalar dot = (sol.duals.beta * zhat.values).sum();
  out.grad = sol.duals.beta / mass_hat - dot / (mass_hat * mass_hat);
  if (io_state != nullptr) *io_state = std::move(sol);
  return out;
}

/// Total Variation distance of the normalized maps, (1/2)|z/|z| - zhat/|zhat||_1.
template <typename Scalar>
LossEvalT<Scalar> tv_loss(const DensityMapT<Scalar>& z,
                          const DensityMapT<Scalar>& zhat) {
  detail::check_same_extent(z, zhat);
  const Scalar mass_z = total_mass(z);
  const Scalar mass_hat = total_mass(zhat);
  if (mass_z <= Scalar(0)) throw ZeroMass("tv_loss: |z|_1 = 0");
  if (mass_hat <= Scalar(0)) throw ZeroMass("tv_loss: |zhat|_1 = 0");

  const GridArray<Scalar> v = z.values / mass_z - zhat.values / mass_hat;
  const GridArray<Scalar> sign_v =
      v.unaryExpr([](Scalar x) { return detail::sign(x); });

  LossEvalT<Scalar> out;
  out.value = Scalar(0.5) * v.abs().sum();
  const Scalar dot = (sign_v * zhat.values).sum();
  out.grad =
      Scalar(-0.5) * (sign_v / mass_hat - dot / (mass_hat * mass_hat));
  return out;
}

/// Combined objective: count + lambda1 * OT + lambda2 * |z|_1 * TV, with the
/// matching weighted sum of gradients.
template <typename Scalar>
LossEvalT<Scalar> dm_count_loss(const DensityMapT<Scalar>& z,
                                const DensityMapT<Scalar>& zhat,
                                const DmCountConfigT<Scalar>& cfg,
                                OtSolutionT<Scalar>* io_state = nullptr) {
  if (!(cfg.lambda1 >= Scalar(0)) || !(cfg.lambda2 >= Scalar(0)))
    throw std::invalid_argument("dm_count_loss: weights must be >= 0");
  const LossEvalT<Scalar> c = count_loss(z, zhat);
  const LossEvalT<Scalar> ot = ot_loss(z, zhat, cfg, io_state);
  const LossEvalT<Scalar> tv = tv_loss(z, zhat);
  const Scalar mass_z = total_mass(z);

  LossEvalT<Scalar> out;
  out.value = c.value + cfg.lambda1 * ot.value + cfg.lambda2 * mass_z * tv.value;
  out.grad =
      c.grad + cfg.lambda1 * ot.grad + cfg.lambda2 * mass_z * tv.grad;
  return out;
}

/// Pixel-wise baseline against a (possibly Gaussian-smoothed) target map.
template <typename Scalar>
LossEvalT<Scalar> pixelwise_loss(const DensityMapT<Scalar>& t,
                                 const DensityMapT<Scalar>& zhat,
                                 PixelNorm norm) {
  detail::check_same_extent(t, zhat);
  const GridArray<Scalar> diff = zhat.values - t.values;
  LossEvalT<Scalar> out;
  if (norm == PixelNorm::L2) {
    out.value = diff.square().sum();
    out.grad = Scalar(2) * diff;
  } else {
    out.value = diff.abs().sum();
    out.grad = diff.unaryExpr([](Scalar x) { return detail::sign(x); });
  }
  return out;
}

/// Posterior maps of the Bayesian baseline: row i holds p_i, the Gaussian
/// at dot q_i divided pixel-wise by the sum over all dots. Computed as a
/// per-pixel softmax of -d^2/(2 sigma^2), which keeps far pixels finite and
/// cancels the Gaussian normalization constant exactly.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> bayesian_posteriors(
    const DotAnnotationT<Scalar>& ann, const BayesianConfigT<Scalar>& cfg) {
  const Eigen::Index n_dots = ann.count();
  if (n_dots == 0) throw EmptyAnnotation("bayesian_posteriors: no dots");
  if (!(cfg.sigma > Scalar(0)))
    throw std::invalid_argument("bayesian_posteriors: sigma must be > 0");

  const Eigen::Index n = ann.rows * ann.cols;
  const Scalar inv_two_sigma2 = Scalar(1) / (Scalar(2) * cfg.sigma * cfg.sigma);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> post(n_dots, n);
  FlatArray<Scalar> expo(n_dots);
  for (Eigen::Index r = 0; r < ann.rows; ++r) {
    for (Eigen::Index c = 0; c < ann.cols; ++c) {
      for (Eigen::Index i = 0; i < n_dots; ++i) {
        const Scalar dr = static_cast<Scalar>(r) - ann.points[i][0];
        const Scalar dc = static_cast<Scalar>(c) - ann.points[i][1];
        expo[i] = -(dr * dr + dc * dc) * inv_two_sigma2;
      }
      const Scalar m = expo.maxCoeff();
      const FlatArray<Scalar> e = (expo - m).exp();
      post.col(r * ann.cols + c) = (e / e.sum()).matrix();
    }
  }
  return post;
}

/// Bayesian loss given precomputed posteriors (one row per dot).
template <typename Scalar>
LossEvalT<Scalar> bayesian_loss(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& posteriors,
    const DensityMapT<Scalar>& zhat) {
  if (posteriors.cols() != zhat.size())
    throw GridMismatch("posterior columns differ from zhat size");
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Map<const Vec> zvec(zhat.values.data(), zhat.size());
  const Vec dots = posteriors * zvec;
  Vec signs(dots.size());
  for (Eigen::Index i = 0; i < dots.size(); ++i)
    signs[i] = detail::sign(dots[i] - Scalar(1));

  LossEvalT<Scalar> out;
  out.value = (Vec::Ones(dots.size()) - dots).cwiseAbs().sum();
  const Vec g = posteriors.transpose() * signs;
  out.grad = Eigen::Map<const GridArray<Scalar>>(g.data(), zhat.rows(),
                                                 zhat.cols());
  return out;
}

/// sum_i |1 - <p_i, zhat>| with gradient sum_i sign(<p_i, zhat> - 1) p_i.
template <typename Scalar>
LossEvalT<Scalar> bayesian_loss(const DotAnnotationT<Scalar>& ann,
                                const DensityMapT<Scalar>& zhat,
                                const BayesianConfigT<Scalar>& cfg) {
  if (ann.count() == 0) throw EmptyAnnotation("bayesian_loss: no dots");
  if (ann.rows != zhat.rows() || ann.cols != zhat.cols())
    throw GridMismatch("annotation extent differs from zhat");
  return bayesian_loss(bayesian_posteriors(ann, cfg), zhat);
}

}  // namespace dmcount

#endif  // DMCOUNT_LOSSES_HPP
