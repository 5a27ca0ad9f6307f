// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dmcount/descent.hpp"
#include "dmcount/gradcheck.hpp"
#include "dmcount/grid.hpp"
#include "dmcount/io.hpp"
#include "dmcount/losses.hpp"
#include "dmcount/metrics.hpp"
#include "dmcount/ot.hpp"
#include "dmcount/random.hpp"
#include "dmcount/smoothing.hpp"

using namespace dmcount;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("[%s] criterion %d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL",
              id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void criterion(int id, const std::string& name, Fn&& fn) {
  const auto t0 = Clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - t0).count();
  report(id, name, pass, detail, secs);
}

DensityMap random_prob_row(std::mt19937_64& rng, Eigen::Index n) {
  GridArray<double> g(1, n);
  for (Eigen::Index i = 0; i < n; ++i) g(0, i) = uniform(rng, 0.05, 1.0);
  g /= g.sum();
  return DensityMap(g);
}

// 1. Analytic gradients vs central finite differences for every loss.
bool c1_gradients(std::string& detail) {
  const auto t0 = Clock::now();
  DmCountConfig cfg;
  cfg.sinkhorn.reg = 10.0;
  cfg.sinkhorn.max_iters = 10000;
  cfg.sinkhorn.tolerance = 1e-12;
  const auto results =
      run_gradient_suite<double>(42, 20, 6, 6, cfg, BayesianConfig{}, 1e-4);
  double worst = 0.0;
  std::string worst_loss;
  bool pass = true;
  for (const auto& r : results) {
    if (r.cases != 20) pass = false;
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_loss = r.loss;
    }
    if (!(r.max_rel_error <= 1e-2)) pass = false;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs >= 60.0) pass = false;
  detail = "max rel err " + format_real(worst) + " (" + worst_loss +
           "), limit 1e-2; " + format_real(secs) + "s < 60s";
  return pass;
}

// 2. Sinkhorn value against the exact 1-D oracle.
bool c2_sinkhorn_oracle(std::string& detail) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1234);
  double worst_ratio = 0.0;
  bool pass = true;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(uniform01(rng) * 14);
    const auto mu = random_prob_row(rng, n);
    const auto nu = random_prob_row(rng, n);
    FlatArray<double> pos(n);
    for (Eigen::Index i = 0; i < n; ++i) pos[i] = static_cast<double>(i);
    const double exact =
        exact_ot_1d<double>(mu.values.row(0).transpose(), pos,
                            nu.values.row(0).transpose(), pos, 2.0);
    SinkhornConfig cfg;
    cfg.reg = 0.01;
    cfg.max_iters = 5000;
    const GridCost cost{1, n};
    const auto sol = sinkhorn(mu, nu, cost, cfg);
    const double gap = std::abs(sol.value - exact);
    worst_ratio = std::max(worst_ratio, gap / (0.02 * cost.max_cost()));
    if (!(gap <= 0.02 * cost.max_cost())) pass = false;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs >= 30.0) pass = false;
  detail = "worst gap at " + format_real(100.0 * worst_ratio) +
           "% of the 0.02*C_inf budget; " + format_real(secs) + "s < 30s";
  return pass;
}

// 3. C_inf Lipschitz property of exact OT in both marginals.
bool c3_lipschitz(std::string& detail) {
  std::mt19937_64 rng(99);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform01(rng) * 12);
    FlatArray<double> pos(n);
    for (Eigen::Index i = 0; i < n; ++i) pos[i] = uniform(rng, 0.0, 20.0);
    const auto draw = [&]() {
      FlatArray<double> w(n);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = uniform(rng, 0.01, 1.0);
      w /= w.sum();
      return w;
    };
    const auto mu1 = draw(), nu1 = draw(), mu2 = draw(), nu2 = draw();
    const double w11 = exact_ot_1d(mu1, pos, nu1, pos, 2.0);
    const double w22 = exact_ot_1d(mu2, pos, nu2, pos, 2.0);
    const double span = pos.maxCoeff() - pos.minCoeff();
    const double c_inf = span * span;
    const double budget =
        c_inf * ((mu1 - mu2).abs().sum() + (nu1 - nu2).abs().sum());
    if (std::abs(w11 - w22) > budget + 1e-12) ++violations;
  }
  detail = std::to_string(violations) + " violations over 200 quadruples";
  return violations == 0;
}

// 4. Pixel-perfect fit on the smoothed target realizes error |t - z|_1.
bool c4_theorem1(std::string& detail) {
  bool pass = true;
  double worst_fit = 0.0, worst_gap = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::Index dots = 50 + 16 * k;  // 50..194
    const auto ann = synth_target<double>(64, 64, dots, 500 + k);
    const auto t = smooth_fixed(ann, KernelSpec(4.0));
    const auto z = rasterize(ann);
    DescentConfig cfg;
    cfg.eta = 0.1;  // smooth quadratic; Hessian is 2I so this converges fast
    cfg.max_iters = 20000;
    cfg.loss_kind = PixelwiseL2Smoothed<double>{4.0};
    cfg.seed = 500 + k;
    const auto res = descend(ann, cfg);
    const double n = static_cast<double>(dots);
    const double fit = (res.final_map.values - t.values).abs().sum();
    const double realized = (res.final_map.values - z.values).abs().sum();
    const double predicted = (t.values - z.values).abs().sum();
    worst_fit = std::max(worst_fit, fit / n);
    worst_gap = std::max(worst_gap, std::abs(realized - predicted) / n);
    if (!(fit <= 0.01 * n)) pass = false;
    if (!(std::abs(realized - predicted) <= 0.02 * n)) pass = false;
  }
  detail = "worst |final-t|_1/N " + format_real(worst_fit) +
           " (limit 0.01); worst realized-vs-|t-z|_1 gap/N " +
           format_real(worst_gap) + " (limit 0.02)";
  return pass;
}

// 5. Bayesian loss is underdetermined: two seeds reach ~zero loss with
// far-apart final maps; the analytic single-dot identity holds exactly.
bool c5_bayesian(std::string& detail) {
  const DotAnnotation one(64, 64, {{32.0, 32.0}});
  const auto posteriors = bayesian_posteriors(one, BayesianConfig{});
  DescentConfig cfg;
  cfg.eta = 1e-7;
  cfg.max_iters = 200000;
  cfg.loss_kind = BayesianDescent<double>{8.0};

  cfg.seed = 1;
  const auto r1 = descend(one, cfg);
  cfg.seed = 2;
  const auto r2 = descend(one, cfg);
  const double l1 = bayesian_loss(posteriors, r1.final_map).value;
  const double l2 = bayesian_loss(posteriors, r2.final_map).value;
  const double dist = (r1.final_map.values - r2.final_map.values).abs().sum();

  bool pass = l1 <= 1e-3 && l2 <= 1e-3 && dist >= 0.5;

  // Analytic N = 1 case: the loss only sees the total mass.
  std::mt19937_64 rng(7);
  for (int t = 0; t < 5; ++t) {
    GridArray<double> g(64, 64);
    for (Eigen::Index i = 0; i < g.size(); ++i)
      g.data()[i] = uniform(rng, 0.0, 0.002);
    const DensityMap m(g);
    const double expected = std::abs(1.0 - total_mass(m));
    if (std::abs(bayesian_loss(posteriors, m).value - expected) > 1e-9)
      pass = false;
  }
  GridArray<double> corner_a = GridArray<double>::Zero(64, 64);
  GridArray<double> corner_b = GridArray<double>::Zero(64, 64);
  corner_a(0, 0) = 1.0;
  corner_b(63, 63) = 1.0;
  const DensityMap ca(corner_a), cb(corner_b);
  if (bayesian_loss(posteriors, ca).value > 1e-12) pass = false;
  if (bayesian_loss(posteriors, cb).value > 1e-12) pass = false;
  if ((ca.values - cb.values).abs().sum() != 2.0) pass = false;

  detail = "losses " + format_real(l1) + "/" + format_real(l2) +
           " (limit 1e-3), map distance " + format_real(dist) +
           " (limit 0.5), analytic single-dot identity";
  return pass;
}

// 6. Toy comparison: dm_count counts within 1%, and the PSNR/SSIM orderings
// dm_count > bayesian > pixelwise both hold.
bool c6_toy_ordering(std::string& detail) {
  const auto t0 = Clock::now();
  const auto target = synth_target<double>(64, 64, 115, 7);
  CompareConfig cfg;  // eta 1e-5, reg 10, 100 Sinkhorn iters, lambdas 0.1/0.01
  cfg.seed = 7;
  const auto rep = compare_losses(target, cfg);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();

  if (rep.entries.size() != 3 || !rep.entries[0].result ||
      !rep.entries[1].result || !rep.entries[2].result) {
    detail = "missing results";
    return false;
  }
  const auto& pixel = *rep.entries[0].result;
  const auto& bayes = *rep.entries[1].result;
  const auto& dm = *rep.entries[2].result;

  const double count_err = std::abs(dm.final_count - dm.target_count);
  bool pass = count_err <= 0.01 * dm.target_count;
  if (!(dm.psnr > bayes.psnr && bayes.psnr > pixel.psnr)) pass = false;
  if (!(dm.ssim > bayes.ssim && bayes.ssim > pixel.ssim)) pass = false;
  if (secs >= 600.0) pass = false;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "dm count err %.3f/115; psnr %.2f > %.2f > %.2f; ssim %.3f > "
                "%.3f > %.3f; %.0fs < 600s",
                count_err, dm.psnr, bayes.psnr, pixel.psnr, dm.ssim,
                bayes.ssim, pixel.ssim, secs);
  detail = buf;
  return pass;
}

// 7. One 64x64 Sinkhorn solve, reg 10, all 100 iterations, under 2 s.
bool c7_performance(std::string& detail) {
  std::mt19937_64 rng(2718);
  GridArray<double> a(64, 64), b(64, 64);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a.data()[i] = uniform(rng, 0.1, 1.0);
    b.data()[i] = uniform(rng, 0.1, 1.0);
  }
  a /= a.sum();
  b /= b.sum();
  const DensityMap mu(a), nu(b);
  SinkhornConfig cfg;
  cfg.reg = 10.0;
  cfg.max_iters = 100;
  cfg.tolerance = 0.0;  // force the full 100 iterations
  const auto t0 = Clock::now();
  const auto sol = sinkhorn(mu, nu, GridCost{64, 64}, cfg);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  detail = "100 iterations in " + format_real(secs) + "s (limit 2s); value " +
           format_real(sol.value);
  return sol.iterations_run == 100 && secs < 2.0;
}

// 8. Module invariants re-checked in one place.
bool c8_invariants(std::string& detail) {
  std::mt19937_64 rng(31415);
  bool pass = true;
  std::string failed;
  const auto expect = [&](bool ok, const char* what) {
    if (!ok) {
      pass = false;
      if (!failed.empty()) failed += ", ";
      failed += what;
    }
  };

  // Normalization idempotence.
  for (int t = 0; t < 10; ++t) {
    GridArray<double> g(6, 6);
    for (Eigen::Index i = 0; i < g.size(); ++i)
      g.data()[i] = uniform(rng, 0.0, 5.0);
    const auto once = normalize(DensityMap(g));
    const auto twice = normalize(once);
    expect((twice.values - once.values).abs().sum() <=
               8 * machine_epsilon<double>(),
           "normalize idempotence");
  }

  // Count preservation of smoothing.
  for (int t = 0; t < 5; ++t) {
    const auto ann = synth_target<double>(32, 32, 20 + 7 * t, 100 + t);
    expect(std::abs(total_mass(smooth_fixed(ann, KernelSpec(3.0))) -
                    static_cast<double>(ann.count())) <= 1e-9,
           "smooth_fixed count");
    expect(std::abs(total_mass(smooth_adaptive(ann, 3, 0.3)) -
                    static_cast<double>(ann.count())) <= 1e-9,
           "smooth_adaptive count");
  }

  // TV bounds and symmetry.
  for (int t = 0; t < 10; ++t) {
    GridArray<double> ga(4, 4), gb(4, 4);
    for (Eigen::Index i = 0; i < ga.size(); ++i) {
      ga.data()[i] = uniform(rng, 0.1, 2.0);
      gb.data()[i] = uniform(rng, 0.1, 2.0);
    }
    const DensityMap a(ga), b(gb);
    const double v = tv_loss(a, b).value;
    expect(v >= 0.0 && v <= 1.0, "tv bounds");
    expect(std::abs(tv_loss(b, a).value - v) <= 1e-12, "tv symmetry");
    expect(tv_loss(a, a).value == 0.0, "tv identity");
  }

  // dm_count decomposition at 1e-12.
  {
    GridArray<double> ga(6, 6), gb(6, 6);
    for (Eigen::Index i = 0; i < ga.size(); ++i) {
      ga.data()[i] = uniform(rng, 0.5, 1.5);
      gb.data()[i] = uniform(rng, 0.5, 1.5);
    }
    const DensityMap z(ga), zh(gb);
    DmCountConfig cfg;
    const double whole = dm_count_loss(z, zh, cfg).value;
    const double parts = count_loss(z, zh).value +
                         cfg.lambda1 * ot_loss(z, zh, cfg).value +
                         cfg.lambda2 * total_mass(z) * tv_loss(z, zh).value;
    expect(std::abs(whole - parts) <= 1e-12, "dm_count decomposition");
  }

  // Metric identities.
  {
    GridArray<double> g(12, 12);
    for (Eigen::Index i = 0; i < g.size(); ++i)
      g.data()[i] = uniform(rng, 0.0, 1.0);
    const DensityMap a(g);
    expect(std::isinf(psnr(a, a)), "psnr identity");
    expect(std::abs(ssim(a, a) - 1.0) <= 1e-9, "ssim identity");
    const auto m = count_metrics<double>({{10, 8}, {10, 12}});
    expect(m.mae <= m.rmse, "mae <= rmse");
  }

  // Determinism of seeded runs.
  {
    const auto ann = synth_target<double>(16, 16, 8, 77);
    DescentConfig cfg;
    cfg.eta = 0.05;
    cfg.max_iters = 2000;
    cfg.loss_kind = PixelwiseL2Smoothed<double>{2.0};
    cfg.seed = 77;
    const auto r1 = descend(ann, cfg);
    const auto r2 = descend(ann, cfg);
    expect((r1.final_map.values == r2.final_map.values).all() &&
               r1.iterations_run == r2.iterations_run,
           "descent determinism");
    expect((init_source<double>(16, 16, 5).values ==
            init_source<double>(16, 16, 5).values)
               .all(),
           "init determinism");
  }

  detail = pass ? "normalization, smoothing mass, TV, decomposition, metrics, "
                  "determinism"
                : failed;
  return pass;
}

}  // namespace

int main() {
  std::printf("acceptance suite (single-threaded)\n");
  criterion(1, "gradient suite", c1_gradients);
  criterion(2, "sinkhorn vs 1-D oracle", c2_sinkhorn_oracle);
  criterion(3, "Lipschitz property of exact OT", c3_lipschitz);
  criterion(4, "smoothed-target fit keeps the raster error", c4_theorem1);
  criterion(5, "bayesian underdetermination", c5_bayesian);
  criterion(6, "toy comparison ordering", c6_toy_ordering);
  criterion(7, "sinkhorn performance at n = 4096", c7_performance);
  criterion(8, "module invariant suite", c8_invariants);
  std::printf("%d failure(s)\n", g_failures);
  return g_failures;
}
