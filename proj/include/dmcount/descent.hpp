#ifndef DMCOUNT_DESCENT_HPP
#define DMCOUNT_DESCENT_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dmcount/grid.hpp"
#include "dmcount/losses.hpp"
#include "dmcount/metrics.hpp"
#include "dmcount/random.hpp"
#include "dmcount/smoothing.hpp"
#include "dmcount/types.hpp"

namespace dmcount {

// Loss selection for the toy descent. Pixel-wise variants regress onto the
// Gaussian-smoothed target; bayesian and dm_count see the raw annotation.
template <typename Scalar>
struct PixelwiseL2Smoothed {
  Scalar sigma = Scalar(4);
};
template <typename Scalar>
struct PixelwiseL1Smoothed {
  Scalar sigma = Scalar(4);
};
template <typename Scalar>
struct BayesianDescent {
  Scalar sigma = Scalar(8);
};
template <typename Scalar>
struct DmCountDescent {
  DmCountConfigT<Scalar> cfg;
};

template <typename Scalar>
using LossKindT =
    std::variant<PixelwiseL2Smoothed<Scalar>, PixelwiseL1Smoothed<Scalar>,
                 BayesianDescent<Scalar>, DmCountDescent<Scalar>>;

template <typename Scalar>
struct DescentConfigT {
  Scalar eta = Scalar(1e-5);
  long max_iters = 200000;
  // Stop once the loss improvement between consecutive 100-iteration
  // samples falls below this.
  Scalar stop_tol = Scalar(1e-9);
  LossKindT<Scalar> loss_kind = PixelwiseL2Smoothed<Scalar>{};
  std::uint64_t seed = 0;
  // Reuses the previous iteration's Sinkhorn duals as the next starting
  // point; must not move the final loss by more than ~1e-6 vs cold starts.
  bool warm_start = true;
};

template <typename Scalar>
struct ToyResultT {
  DensityMapT<Scalar> final_map;
  Scalar final_count = Scalar(0);
  Scalar target_count = Scalar(0);
  std::vector<std::pair<long, Scalar>> loss_trace;  // (iteration, loss)
  Scalar psnr = Scalar(0);
  Scalar ssim = Scalar(0);
  long iterations_run = 0;
};

using DescentConfig = DescentConfigT<double>;
using ToyResult = ToyResultT<double>;
using LossKind = LossKindT<double>;

/// Source map for the toy problem: i.i.d. uniform entries in [0, 0.01],
/// deterministic per seed.
template <typename Scalar>
DensityMapT<Scalar> init_source(Eigen::Index rows, Eigen::Index cols,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GridArray<Scalar> g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      g(r, c) = Scalar(0.01) * uniform01<Scalar>(rng);
  return DensityMapT<Scalar>(std::move(g));
}

/// Synthetic dot-annotation target: a dense cluster plus sparse uniform
/// background, no exact duplicates, deterministic per seed.
template <typename Scalar>
DotAnnotationT<Scalar> synth_target(Eigen::Index rows, Eigen::Index cols,
                                    Eigen::Index n_dots, std::uint64_t seed) {
  if (n_dots > rows * cols)
    throw TooMany("synth_target: more dots than pixels");
  std::mt19937_64 rng(seed);
  const Scalar row_hi = std::nextafter(static_cast<Scalar>(rows), Scalar(0));
  const Scalar col_hi = std::nextafter(static_cast<Scalar>(cols), Scalar(0));
  const Scalar center_r = uniform<Scalar>(rng, Scalar(0.3) * rows, Scalar(0.7) * rows);
  const Scalar center_c = uniform<Scalar>(rng, Scalar(0.3) * cols, Scalar(0.7) * cols);
  const Scalar spread_r = static_cast<Scalar>(rows) / Scalar(8);
  const Scalar spread_c = static_cast<Scalar>(cols) / Scalar(8);

  std::set<std::pair<Scalar, Scalar>> seen;
  std::vector<Eigen::Matrix<Scalar, 2, 1>> pts;
  pts.reserve(static_cast<std::size_t>(n_dots));
  while (pts.size() < static_cast<std::size_t>(n_dots)) {
    Scalar r, c;
    if (uniform01<Scalar>(rng) < Scalar(0.7)) {
      const auto [g1, g2] = normal_pair<Scalar>(rng);
      r = std::clamp(center_r + spread_r * g1, Scalar(0), row_hi);
      c = std::clamp(center_c + spread_c * g2, Scalar(0), col_hi);
    } else {
      r = uniform<Scalar>(rng, Scalar(0), static_cast<Scalar>(rows));
      c = uniform<Scalar>(rng, Scalar(0), static_cast<Scalar>(cols));
    }
    if (!seen.insert({r, c}).second) continue;
    pts.push_back({r, c});
  }
  return DotAnnotationT<Scalar>(rows, cols, std::move(pts));
}

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace detail

/// Projected gradient descent zhat <- max(0, zhat - eta * grad) from the
/// seeded uniform source onto the target annotation. Gradients of Eq.-style
/// losses assume zhat >= 0, so the projection after every step keeps the
/// iterates in the domain. Samples the loss every 100 iterations and stops
/// once improvement between samples drops below stop_tol; a sample that
/// fails the check is not appended, so the recorded trace is decreasing.
template <typename Scalar>
ToyResultT<Scalar> descend(const DotAnnotationT<Scalar>& target,
                           const DescentConfigT<Scalar>& cfg) {
  if (!(cfg.eta > Scalar(0)))
    throw std::invalid_argument("descend: eta must be > 0");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("descend: max_iters must be >= 1");

  const DensityMapT<Scalar> raster = rasterize(target);
  using EvalFn = std::function<LossEvalT<Scalar>(const DensityMapT<Scalar>&)>;
  const EvalFn eval = std::visit(
      detail::overloaded{
          [&](const PixelwiseL2Smoothed<Scalar>& k) -> EvalFn {
            DensityMapT<Scalar> t =
                smooth_fixed(target, KernelSpecT<Scalar>(k.sigma));
            return [t](const DensityMapT<Scalar>& zh) {
              return pixelwise_loss(t, zh, PixelNorm::L2);
            };
          },
          [&](const PixelwiseL1Smoothed<Scalar>& k) -> EvalFn {
            DensityMapT<Scalar> t =
                smooth_fixed(target, KernelSpecT<Scalar>(k.sigma));
            return [t](const DensityMapT<Scalar>& zh) {
              return pixelwise_loss(t, zh, PixelNorm::L1);
            };
          },
          [&](const BayesianDescent<Scalar>& k) -> EvalFn {
            if (target.count() == 0)
              throw EmptyAnnotation("descend: bayesian loss needs dots");
            auto post =
                bayesian_posteriors(target, BayesianConfigT<Scalar>{k.sigma});
            return [post](const DensityMapT<Scalar>& zh) {
              return bayesian_loss(post, zh);
            };
          },
          [&](const DmCountDescent<Scalar>& k) -> EvalFn {
            auto state = std::make_shared<OtSolutionT<Scalar>>();
            const bool warm = cfg.warm_start;
            return [z = raster, k, state, warm](const DensityMapT<Scalar>& zh) {
              return dm_count_loss(z, zh, k.cfg, warm ? state.get() : nullptr);
            };
          }},
      cfg.loss_kind);

  GridArray<Scalar> z = init_source<Scalar>(target.rows, target.cols, cfg.seed).values;
  std::vector<std::pair<long, Scalar>> trace;
  long it = 0;
  for (; it < cfg.max_iters; ++it) {
    const DensityMapT<Scalar> zm(z);
    const LossEvalT<Scalar> ev = eval(zm);
    if (!std::isfinite(ev.value) || !ev.grad.isFinite().all())
      throw NonFinite("descend: loss at iteration " + std::to_string(it));
    if (it % 100 == 0) {
      if (!trace.empty() && trace.back().second - ev.value < cfg.stop_tol)
        break;
      trace.emplace_back(it, ev.value);
    }
    z = (z - cfg.eta * ev.grad).max(Scalar(0));
  }

  ToyResultT<Scalar> res;
  res.final_map = DensityMapT<Scalar>(std::move(z));
  res.final_count = total_mass(res.final_map);
  res.target_count = static_cast<Scalar>(target.count());
  res.loss_trace = std::move(trace);
  res.iterations_run = it;
  res.psnr = psnr(res.final_map, raster);
  // SSIM needs an 11x11 window; tiny toy grids report NaN instead.
  res.ssim = (target.rows >= 11 && target.cols >= 11)
                 ? ssim(res.final_map, raster)
                 : std::numeric_limits<Scalar>::quiet_NaN();
  return res;
}

template <typename Scalar>
struct CompareConfigT {
  Scalar eta = Scalar(1e-5);
  long max_iters = 200000;
  Scalar stop_tol = Scalar(1e-9);
  std::uint64_t seed = 0;
  bool warm_start = true;
  Scalar pixel_sigma = Scalar(4);
  Scalar bayes_sigma = Scalar(8);
  DmCountConfigT<Scalar> dm;
};

template <typename Scalar>
struct CompareEntryT {
  std::string name;
  std::optional<ToyResultT<Scalar>> result;
  std::string skip_reason;  // non-empty when the run was skipped
};

template <typename Scalar>
struct CompareReportT {
  std::vector<CompareEntryT<Scalar>> entries;
};

/// One ranking-table row; rank 1 is best (smallest |count error|, largest
/// PSNR / SSIM).
template <typename Scalar>
struct RankedRowT {
  std::string name;
  Scalar count_error;
  Scalar psnr;
  Scalar ssim;
  int rank_count_error = 0;
  int rank_psnr = 0;
  int rank_ssim = 0;
};

using CompareConfig = CompareConfigT<double>;
using CompareReport = CompareReportT<double>;
using RankedRow = RankedRowT<double>;

/// Runs the toy descent under the pixel-wise L2, Bayesian and dm_count
/// losses from the same seed and initial map. Losses whose preconditions
/// the target cannot meet (no dots, zero mass) are skipped with a reason.
template <typename Scalar>
CompareReportT<Scalar> compare_losses(const DotAnnotationT<Scalar>& target,
                                      const CompareConfigT<Scalar>& cfg) {
  const auto run = [&](LossKindT<Scalar> kind) {
    DescentConfigT<Scalar> d;
    d.eta = cfg.eta;
    d.max_iters = cfg.max_iters;
    d.stop_tol = cfg.stop_tol;
    d.seed = cfg.seed;
    d.warm_start = cfg.warm_start;
    d.loss_kind = std::move(kind);
    return descend(target, d);
  };

  CompareReportT<Scalar> report;
  report.entries.push_back(
      {"pixelwise", run(PixelwiseL2Smoothed<Scalar>{cfg.pixel_sigma}), ""});
  if (target.count() == 0) {
    report.entries.push_back(
        {"bayesian", std::nullopt, "target has no dots"});
    report.entries.push_back(
        {"dm_count", std::nullopt, "target has zero mass"});
  } else {
    report.entries.push_back(
        {"bayesian", run(BayesianDescent<Scalar>{cfg.bayes_sigma}), ""});
    report.entries.push_back(
        {"dm_count", run(DmCountDescent<Scalar>{cfg.dm}), ""});
  }
  return report;
}

template <typename Scalar>
std::vector<RankedRowT<Scalar>> ranking_table(
    const CompareReportT<Scalar>& report) {
  std::vector<RankedRowT<Scalar>> rows;
  for (const auto& e : report.entries) {
    if (!e.result) continue;
    rows.push_back({e.name,
                    std::abs(e.result->final_count - e.result->target_count),
                    e.result->psnr, e.result->ssim, 0, 0, 0});
  }
  for (auto& row : rows) {
    for (const auto& other : rows) {
      if (other.count_error < row.count_error) ++row.rank_count_error;
      if (other.psnr > row.psnr) ++row.rank_psnr;
      if (other.ssim > row.ssim) ++row.rank_ssim;
    }
    ++row.rank_count_error;
    ++row.rank_psnr;
    ++row.rank_ssim;
  }
  return rows;
}

}  // namespace dmcount

#endif  // DMCOUNT_DESCENT_HPP
