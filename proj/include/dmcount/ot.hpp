#ifndef DMCOUNT_OT_HPP
#define DMCOUNT_OT_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "dmcount/grid.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

/// Quadratic transport cost over grid coordinates, defined implicitly:
/// C[i][j] = scale * ||coord(i) - coord(j)||^2 with coord the (row, col)
/// pixel center of a flat row-major index. The n x n matrix is never stored.
template <typename Scalar>
struct GridCostT {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Scalar scale = Scalar(1);

  Eigen::Index n() const { return rows * cols; }

  Scalar operator()(Eigen::Index i, Eigen::Index j) const {
    const Scalar dr = static_cast<Scalar>(i / cols - j / cols);
    const Scalar dc = static_cast<Scalar>(i % cols - j % cols);
    return scale * (dr * dr + dc * dc);
  }

  /// C_inf, the maximum entry of the cost matrix.
  Scalar max_cost() const {
    const Scalar dr = static_cast<Scalar>(rows - 1);
    const Scalar dc = static_cast<Scalar>(cols - 1);
    return scale * (dr * dr + dc * dc);
  }
};

/// Sinkhorn dual pair, gauge-fixed so the mass-weighted mean of alpha over
/// its source distribution is zero. Entries at zero-mass bins are 0 by
/// convention and carry no mass in the objective.
template <typename Scalar>
struct DualPotentialsT {
  GridArray<Scalar> alpha;
  GridArray<Scalar> beta;
};

template <typename Scalar>
struct SinkhornConfigT {
  Scalar reg = Scalar(10);
  int max_iters = 100;
  Scalar tolerance = Scalar(1e-9);
};

template <typename Scalar>
struct OtSolutionT {
  DualPotentialsT<Scalar> duals;
  Scalar value = Scalar(0);        // <alpha, mu> + <beta, nu>
  int iterations_run = 0;
  Scalar marginal_error = Scalar(0);  // L1 violation of the plan marginals
};

using GridCost = GridCostT<double>;
using DualPotentials = DualPotentialsT<double>;
using SinkhornConfig = SinkhornConfigT<double>;
using OtSolution = OtSolutionT<double>;

namespace detail {

enum class LsePass { Auto, Shifted, PerCell };

#if defined(__SSE2__)
// The shifted pass multiplies pairs of tiny exponentials whose products land
// in the subnormal range and stall on microcode. Each output's dominant term
// stays above exp(-600), far over the flush threshold, so flushing denormals
// to zero perturbs results by less than 1e-130 relative. Scoped so the
// caller's FP environment is restored.
class DenormalGuard {
 public:
  DenormalGuard() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~DenormalGuard() { _mm_setcsr(saved_); }
  DenormalGuard(const DenormalGuard&) = delete;
  DenormalGuard& operator=(const DenormalGuard&) = delete;

 private:
  unsigned int saved_;
};
#else
class DenormalGuard {};
#endif

// Scaled squared distances (a - b)^2 * factor between all axis positions.
template <typename Scalar>
GridArray<Scalar> axis_d2(Eigen::Index extent, Scalar factor) {
  GridArray<Scalar> d2(extent, extent);
  for (Eigen::Index a = 0; a < extent; ++a)
    for (Eigen::Index b = 0; b < extent; ++b) {
      const Scalar d = static_cast<Scalar>(a - b);
      d2(a, b) = factor * d * d;
    }
  return d2;
}

// Per-axis data for the separable log-domain kernel application.
//
// Strategy per axis, equal results up to rounding:
//  - Shifted: shift each slice by its max and evaluate the remaining sum as
//    one matrix product against exp(-d2). Valid only while exp(-d2) does not
//    underflow, i.e. d2.max() comfortably below -log(DBL_MIN) ~ 708; the
//    dominant term of each output then survives in the product.
//  - PerCell: per-output stabilized logsumexp, valid for any d2.
template <typename Scalar>
struct SeparableKernelT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  GridArray<Scalar> d2_rows, d2_cols;
  Mat k_rows, k_cols;  // exp(-d2), materialized only for shifted axes
  bool shifted_rows = false, shifted_cols = false;

  static SeparableKernelT make(Eigen::Index rows, Eigen::Index cols,
                               Scalar factor, LsePass strategy) {
    SeparableKernelT k;
    k.d2_rows = axis_d2<Scalar>(rows, factor);
    k.d2_cols = axis_d2<Scalar>(cols, factor);
    const auto pick = [&](const GridArray<Scalar>& d2) {
      if (strategy == LsePass::Auto)
        return d2.maxCoeff() < Scalar(600);
      return strategy == LsePass::Shifted;
    };
    k.shifted_rows = pick(k.d2_rows);
    k.shifted_cols = pick(k.d2_cols);
    if (k.shifted_rows) k.k_rows = (-k.d2_rows).exp().matrix();
    if (k.shifted_cols) k.k_cols = (-k.d2_cols).exp().matrix();
    return k;
  }
};

// Reused buffers for the apply; sized on first use.
template <typename Scalar>
struct LseWorkT {
  GridArray<Scalar> mid, e;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> prod;
};

// out(r, c) = logsumexp_{c'} (in(r, c') - d2_cols(c, c')). -inf entries in
// `in` drop out of the sum; an all -inf slice yields -inf.
template <typename Scalar>
void lse_pass_cols_into(const GridArray<Scalar>& in,
                        const SeparableKernelT<Scalar>& kern,
                        LseWorkT<Scalar>& work, GridArray<Scalar>& out) {
  const Eigen::Index rows = in.rows();
  const Eigen::Index cols = in.cols();
  const Scalar neg_inf = -infinity<Scalar>();
  out.resize(rows, cols);

  if (kern.shifted_cols) {
    work.e.resize(rows, cols);
    work.prod.resize(rows, cols);
    FlatArray<Scalar> row_max = in.rowwise().maxCoeff();
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (std::isfinite(row_max[r]))
        work.e.row(r) = (in.row(r) - row_max[r]).exp();
      else
        work.e.row(r).setZero();
    }
    work.prod.noalias() = work.e.matrix() * kern.k_cols;
    out = work.prod.array().log();
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (std::isfinite(row_max[r]))
        out.row(r) += row_max[r];
      else
        out.row(r).setConstant(neg_inf);
    }
    return;
  }

  FlatArray<Scalar> slice(cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      slice = in.row(r).transpose() - kern.d2_cols.row(c).transpose();
      const Scalar m = slice.maxCoeff();
      out(r, c) =
          std::isfinite(m) ? m + std::log((slice - m).exp().sum()) : neg_inf;
    }
}

// out(r, c) = logsumexp_{r'} (in(r', c) - d2_rows(r, r')).
template <typename Scalar>
void lse_pass_rows_into(const GridArray<Scalar>& in,
                        const SeparableKernelT<Scalar>& kern,
                        LseWorkT<Scalar>& work, GridArray<Scalar>& out) {
  const Eigen::Index rows = in.rows();
  const Eigen::Index cols = in.cols();
  const Scalar neg_inf = -infinity<Scalar>();
  out.resize(rows, cols);

  if (kern.shifted_rows) {
    work.e.resize(rows, cols);
    work.prod.resize(rows, cols);
    Eigen::Array<Scalar, 1, Eigen::Dynamic> col_max = in.colwise().maxCoeff();
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (std::isfinite(col_max[c]))
        work.e.col(c) = (in.col(c) - col_max[c]).exp();
      else
        work.e.col(c).setZero();
    }
    work.prod.noalias() = kern.k_rows * work.e.matrix();
    out = work.prod.array().log();
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (std::isfinite(col_max[c]))
        out.col(c) += col_max[c];
      else
        out.col(c).setConstant(neg_inf);
    }
    return;
  }

  FlatArray<Scalar> slice(rows);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      slice = in.col(c) - kern.d2_rows.row(r).transpose();
      const Scalar m = slice.maxCoeff();
      out(r, c) =
          std::isfinite(m) ? m + std::log((slice - m).exp().sum()) : neg_inf;
    }
}

// Full kernel application in the log domain. The quadratic grid cost is
// separable across axes, so logsumexp over all grid bins factors into a
// column pass followed by a row pass.
template <typename Scalar>
void lse_apply_into(const GridArray<Scalar>& in,
                    const SeparableKernelT<Scalar>& kern,
                    LseWorkT<Scalar>& work, GridArray<Scalar>& out) {
  lse_pass_cols_into(in, kern, work, work.mid);
  lse_pass_rows_into(work.mid, kern, work, out);
}

// Convenience wrappers for tests and small one-off calls.
template <typename Scalar>
GridArray<Scalar> lse_pass_cols(const GridArray<Scalar>& in,
                                const GridArray<Scalar>& d2,
                                LsePass strategy = LsePass::Auto) {
  SeparableKernelT<Scalar> kern;
  kern.d2_cols = d2;
  kern.shifted_cols =
      strategy == LsePass::Auto ? d2.maxCoeff() < Scalar(600)
                                : strategy == LsePass::Shifted;
  if (kern.shifted_cols) kern.k_cols = (-d2).exp().matrix();
  LseWorkT<Scalar> work;
  GridArray<Scalar> out;
  lse_pass_cols_into(in, kern, work, out);
  return out;
}

template <typename Scalar>
GridArray<Scalar> lse_apply(const GridArray<Scalar>& in,
                            const GridArray<Scalar>& d2_rows,
                            const GridArray<Scalar>& d2_cols,
                            LsePass strategy = LsePass::Auto) {
  SeparableKernelT<Scalar> kern;
  kern.d2_rows = d2_rows;
  kern.d2_cols = d2_cols;
  const auto pick = [&](const GridArray<Scalar>& d2) {
    if (strategy == LsePass::Auto) return d2.maxCoeff() < Scalar(600);
    return strategy == LsePass::Shifted;
  };
  kern.shifted_rows = pick(d2_rows);
  kern.shifted_cols = pick(d2_cols);
  if (kern.shifted_rows) kern.k_rows = (-d2_rows).exp().matrix();
  if (kern.shifted_cols) kern.k_cols = (-d2_cols).exp().matrix();
  LseWorkT<Scalar> work;
  GridArray<Scalar> out;
  lse_apply_into(in, kern, work, out);
  return out;
}

template <typename Scalar>
void check_probability_pair(const DensityMapT<Scalar>& mu,
                            const DensityMapT<Scalar>& nu,
                            const GridCostT<Scalar>& cost) {
  if (mu.rows() != nu.rows() || mu.cols() != nu.cols())
    throw GridMismatch("mu and nu extents differ");
  if (cost.rows != mu.rows() || cost.cols != mu.cols())
    throw GridMismatch("cost extent differs from the marginals");
  const Scalar mass_mu = total_mass(mu);
  const Scalar mass_nu = total_mass(nu);
  if (std::abs(mass_mu - Scalar(1)) > Scalar(1e-6))
    throw MassMismatch("|mu|_1 = " + std::to_string(mass_mu));
  if (std::abs(mass_nu - Scalar(1)) > Scalar(1e-6))
    throw MassMismatch("|nu|_1 = " + std::to_string(mass_nu));
}

}  // namespace detail

/// Entropically regularized OT between two probability maps on the same
/// grid, solved by log-domain Sinkhorn iterations (log-sum-exp row/column
/// normalizations of the kernel exp(-C/reg); the plain-domain kernel
/// underflows already at 64x64 with reg = 10). The returned duals satisfy
/// plan(i,j) = mu_i nu_j exp((alpha_i + beta_j - C_ij)/reg).
///
/// Terminates at cfg.max_iters or once the L1 marginal violation drops
/// below cfg.tolerance, whichever happens first. `warm`, when given, seeds
/// the potentials from a previous solution on the same grid.
template <typename Scalar>
OtSolutionT<Scalar> sinkhorn(const DensityMapT<Scalar>& mu,
                             const DensityMapT<Scalar>& nu,
                             const GridCostT<Scalar>& cost,
                             const SinkhornConfigT<Scalar>& cfg,
                             const DualPotentialsT<Scalar>* warm = nullptr) {
  if (!(cfg.reg > Scalar(0)))
    throw std::invalid_argument("sinkhorn: reg must be > 0");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("sinkhorn: max_iters must be >= 1");
  if (!(cfg.tolerance >= Scalar(0)))
    throw std::invalid_argument("sinkhorn: tolerance must be >= 0");
  detail::check_probability_pair(mu, nu, cost);

  const Eigen::Index rows = mu.rows();
  const Eigen::Index columns = mu.cols();
  const detail::DenormalGuard fp_guard;
  const auto kern = detail::SeparableKernelT<Scalar>::make(
      rows, columns, cost.scale / cfg.reg, detail::LsePass::Auto);
  detail::LseWorkT<Scalar> work;

  // log(0) = -inf marks zero-mass bins; they drop out of every logsumexp.
  const GridArray<Scalar> log_mu = mu.values.log();
  const GridArray<Scalar> log_nu = nu.values.log();

  GridArray<Scalar> phi = GridArray<Scalar>::Zero(rows, columns);
  GridArray<Scalar> psi = GridArray<Scalar>::Zero(rows, columns);
  if (warm != nullptr && warm->alpha.rows() == rows &&
      warm->alpha.cols() == columns) {
    phi = warm->alpha / cfg.reg;
    psi = warm->beta / cfg.reg;
  }

  // Iterate phi_i = -lse_j(log nu_j + psi_j - C_ij/reg) and the symmetric
  // psi update. After a psi update the nu marginal is exact, so the whole
  // marginal violation of the state (phi, psi) is the mu-side residual,
  // available for free from the next phi candidate:
  //   row_sum_i = mu_i * exp(phi_i - phi_candidate_i).
  int it = 0;
  Scalar err;
  const GridArray<Scalar> zero = GridArray<Scalar>::Zero(rows, columns);
  GridArray<Scalar> phi_next, input;
  for (;;) {
    input = log_nu + psi;
    detail::lse_apply_into(input, kern, work, phi_next);
    phi_next = -phi_next;
    err = (mu.values > Scalar(0))
              .select(mu.values * ((phi - phi_next).exp() - Scalar(1)).abs(),
                      zero)
              .sum();
    if ((it > 0 && err < cfg.tolerance) || it >= cfg.max_iters) break;
    phi.swap(phi_next);
    input = log_mu + phi;
    detail::lse_apply_into(input, kern, work, psi);
    psi = -psi;
    ++it;
  }

  OtSolutionT<Scalar> sol;
  sol.value = cfg.reg * ((mu.values * phi).sum() + (nu.values * psi).sum());
  sol.iterations_run = it;
  sol.marginal_error = err;
  // Gauge: shift so <alpha, mu> = 0, then zero the off-support entries.
  const Scalar shift = cfg.reg * (mu.values * phi).sum();
  sol.duals.alpha =
      (mu.values > Scalar(0)).select(cfg.reg * phi - shift, zero);
  sol.duals.beta =
      (nu.values > Scalar(0)).select(cfg.reg * psi + shift, zero);
  return sol;
}

/// Regularized primal plan for duals produced by sinkhorn on the same
/// inputs. Materializes the full n x n matrix; meant for small grids.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> transport_plan(
    const DensityMapT<Scalar>& mu, const DensityMapT<Scalar>& nu,
    const GridCostT<Scalar>& cost, const DualPotentialsT<Scalar>& duals,
    Scalar reg) {
  detail::check_probability_pair(mu, nu, cost);
  if (duals.alpha.rows() != mu.rows() || duals.alpha.cols() != mu.cols())
    throw GridMismatch("duals extent differs from the marginals");
  if (!(reg > Scalar(0)))
    throw std::invalid_argument("transport_plan: reg must be > 0");

  const Eigen::Index n = cost.n();
  const Scalar* mu_p = mu.values.data();
  const Scalar* nu_p = nu.values.data();
  const Scalar* a_p = duals.alpha.data();
  const Scalar* b_p = duals.beta.data();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> plan(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      plan(i, j) =
          mu_p[i] * nu_p[j] * std::exp((a_p[i] + b_p[j] - cost(i, j)) / reg);
  return plan;
}

/// Exact OT cost on the line under c(x, y) = |x - y|^exponent for
/// exponent >= 1 (convex cost): the monotone coupling obtained by matching
/// sorted cumulative mass is optimal, so a single merge pass suffices.
/// Serves as the independent oracle for sinkhorn.
template <typename Scalar>
Scalar exact_ot_1d(const FlatArray<Scalar>& mu_weights,
                   const FlatArray<Scalar>& mu_positions,
                   const FlatArray<Scalar>& nu_weights,
                   const FlatArray<Scalar>& nu_positions, Scalar exponent) {
  if (mu_weights.size() != mu_positions.size() ||
      nu_weights.size() != nu_positions.size())
    throw std::invalid_argument("exact_ot_1d: weights/positions sizes differ");
  if (mu_weights.size() == 0 || nu_weights.size() == 0)
    throw std::invalid_argument("exact_ot_1d: empty support");
  if ((mu_weights < Scalar(0)).any() || (nu_weights < Scalar(0)).any())
    throw std::invalid_argument("exact_ot_1d: negative weight");
  if (!(exponent >= Scalar(1)))
    throw std::invalid_argument("exact_ot_1d: exponent must be >= 1");
  if (std::abs(mu_weights.sum() - Scalar(1)) > Scalar(1e-9))
    throw MassMismatch("exact_ot_1d: |mu|_1 != 1");
  if (std::abs(nu_weights.sum() - Scalar(1)) > Scalar(1e-9))
    throw MassMismatch("exact_ot_1d: |nu|_1 != 1");

  const auto order_of = [](const FlatArray<Scalar>& pos) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pos.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](Eigen::Index a, Eigen::Index b) { return pos[a] < pos[b]; });
    return idx;
  };
  const std::vector<Eigen::Index> mi = order_of(mu_positions);
  const std::vector<Eigen::Index> ni = order_of(nu_positions);

  Scalar cost = Scalar(0);
  std::size_t i = 0, j = 0;
  Scalar a = mu_weights[mi[0]];
  Scalar b = nu_weights[ni[0]];
  while (i < mi.size() && j < ni.size()) {
    const Scalar f = std::min(a, b);
    if (f > Scalar(0))
      cost += f * std::pow(std::abs(mu_positions[mi[i]] - nu_positions[ni[j]]),
                           exponent);
    a -= f;
    b -= f;
    if (a <= Scalar(0)) {
      ++i;
      if (i < mi.size()) a = mu_weights[mi[i]];
    }
    if (b <= Scalar(0)) {
      ++j;
      if (j < ni.size()) b = nu_weights[ni[j]];
    }
  }
  return cost;
}

}  // namespace dmcount

#endif  // DMCOUNT_OT_HPP
