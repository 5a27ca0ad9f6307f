#include <doctest.h>

#include "dmcount/descent.hpp"
#include "dmcount/smoothing.hpp"

using namespace dmcount;

TEST_CASE("init_source: deterministic, in range, expected mass") {
  const auto a = init_source<double>(64, 64, 0);
  const auto b = init_source<double>(64, 64, 0);
  CHECK((a.values == b.values).all());
  CHECK((a.values >= 0.0).all());
  CHECK((a.values <= 0.01).all());
  const double mass = total_mass(a);
  CHECK(mass >= 16.4);
  CHECK(mass <= 24.6);
  const auto c = init_source<double>(64, 64, 1);
  CHECK(!(a.values == c.values).all());
}

TEST_CASE("synth_target: count, bounds, determinism, guards") {
  CHECK(synth_target<double>(8, 8, 0, 5).count() == 0);
  const auto a = synth_target<double>(64, 64, 115, 7);
  CHECK(a.count() == 115);
  for (const auto& p : a.points) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < 64.0);
    CHECK(p[1] >= 0.0);
    CHECK(p[1] < 64.0);
  }
  const auto b = synth_target<double>(64, 64, 115, 7);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i)
    CHECK(a.points[i] == b.points[i]);
  CHECK_THROWS_AS(synth_target<double>(4, 4, 17, 0), TooMany);
}

TEST_CASE("descend: pixelwise L2 converges to the smoothed target") {
  const auto target = synth_target<double>(16, 16, 10, 3);
  DescentConfig cfg;
  cfg.eta = 0.1;  // quadratic loss with Hessian 2I admits large steps
  cfg.max_iters = 20000;
  cfg.loss_kind = PixelwiseL2Smoothed<double>{2.0};
  cfg.seed = 3;
  const auto res = descend(target, cfg);
  const auto t = smooth_fixed(target, KernelSpec(2.0));
  const double n = res.target_count;
  CHECK((res.final_map.values - t.values).abs().sum() <= 0.01 * n);
  CHECK((res.final_map.values >= 0.0).all());

  // Trace samples decrease by at least stop_tol between entries.
  for (std::size_t i = 1; i < res.loss_trace.size(); ++i)
    CHECK(res.loss_trace[i].second <
          res.loss_trace[i - 1].second + 1e-6);
}

TEST_CASE("descend: bayesian single dot reaches near-unit mass anywhere") {
  const DotAnnotation one(16, 16, {{8.0, 8.0}});
  DescentConfig cfg;
  cfg.eta = 1e-6;
  cfg.max_iters = 100000;
  cfg.loss_kind = BayesianDescent<double>{8.0};

  cfg.seed = 1;
  const auto r1 = descend(one, cfg);
  cfg.seed = 2;
  const auto r2 = descend(one, cfg);
  CHECK(std::abs(1.0 - r1.final_count) <= 1e-3);
  CHECK(std::abs(1.0 - r2.final_count) <= 1e-3);
  CHECK((r1.final_map.values - r2.final_map.values).abs().sum() >= 0.5);
}

TEST_CASE("descend: deterministic given (target, cfg)") {
  const auto target = synth_target<double>(12, 12, 6, 9);
  DescentConfig cfg;
  cfg.eta = 0.05;
  cfg.max_iters = 3000;
  cfg.loss_kind = PixelwiseL2Smoothed<double>{1.5};
  cfg.seed = 4;
  const auto a = descend(target, cfg);
  const auto b = descend(target, cfg);
  CHECK((a.final_map.values == b.final_map.values).all());
  CHECK(a.iterations_run == b.iterations_run);
  REQUIRE(a.loss_trace.size() == b.loss_trace.size());
  for (std::size_t i = 0; i < a.loss_trace.size(); ++i) {
    CHECK(a.loss_trace[i].first == b.loss_trace[i].first);
    CHECK(a.loss_trace[i].second == b.loss_trace[i].second);
  }
}

TEST_CASE("descend: dm_count warm start matches cold start") {
  const auto target = synth_target<double>(12, 12, 8, 11);
  DescentConfig cfg;
  cfg.eta = 1e-4;
  cfg.max_iters = 1500;
  cfg.loss_kind = DmCountDescent<double>{DmCountConfig{}};
  cfg.seed = 11;
  cfg.warm_start = true;
  const auto warm = descend(target, cfg);
  cfg.warm_start = false;
  const auto cold = descend(target, cfg);

  // Warm starting is an optimization only: re-evaluating the loss at both
  // final maps with a tightly converged solver must agree to 1e-6.
  DmCountConfig tight;
  tight.sinkhorn.max_iters = 10000;
  tight.sinkhorn.tolerance = 1e-13;
  const auto z = rasterize(target);
  const double lw = dm_count_loss(z, warm.final_map, tight).value;
  const double lc = dm_count_loss(z, cold.final_map, tight).value;
  CHECK(std::abs(lw - lc) <= 1e-6);

  // dm_count trace may wiggle from approximate duals, bounded by 1% of the
  // current loss per recorded sample.
  for (std::size_t i = 1; i < warm.loss_trace.size(); ++i) {
    const double prev = warm.loss_trace[i - 1].second;
    const double cur = warm.loss_trace[i].second;
    CHECK(cur - prev <= 0.01 * prev);
  }
}

TEST_CASE("descend: validation and bayesian empty-target error") {
  const auto target = synth_target<double>(8, 8, 3, 1);
  DescentConfig cfg;
  cfg.eta = 0.0;
  CHECK_THROWS_AS(descend(target, cfg), std::invalid_argument);

  DescentConfig bayes;
  bayes.loss_kind = BayesianDescent<double>{};
  CHECK_THROWS_AS(descend(DotAnnotation(8, 8, {}), bayes), EmptyAnnotation);
}

TEST_CASE("compare_losses: skips guarded losses on an empty target") {
  CompareConfig cfg;
  cfg.max_iters = 500;
  cfg.eta = 0.05;
  const auto report = compare_losses(DotAnnotation(16, 16, {}), cfg);
  REQUIRE(report.entries.size() == 3);
  CHECK(report.entries[0].result.has_value());
  CHECK(!report.entries[1].result.has_value());
  CHECK(!report.entries[1].skip_reason.empty());
  CHECK(!report.entries[2].result.has_value());
  CHECK(!report.entries[2].skip_reason.empty());
}

TEST_CASE("compare_losses: identical seeds give identical reports") {
  const auto target = synth_target<double>(12, 12, 5, 21);
  CompareConfig cfg;
  cfg.eta = 1e-4;
  cfg.max_iters = 400;
  cfg.pixel_sigma = 1.5;
  cfg.seed = 13;
  const auto a = compare_losses(target, cfg);
  const auto b = compare_losses(target, cfg);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    REQUIRE(a.entries[i].result.has_value() == b.entries[i].result.has_value());
    if (a.entries[i].result) {
      CHECK((a.entries[i].result->final_map.values ==
             b.entries[i].result->final_map.values)
                .all());
      CHECK(a.entries[i].result->iterations_run ==
            b.entries[i].result->iterations_run);
    }
  }
  const auto rows = ranking_table(a);
  CHECK(rows.size() == 3);
}
