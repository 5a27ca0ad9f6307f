// Command-line front end: file I/O, experiment orchestration, reports and
// heatmap export. Exit codes: 0 success, 2 usage, 3 I/O, 4 numerical.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dmcount/descent.hpp"
#include "dmcount/gradcheck.hpp"
#include "dmcount/grid.hpp"
#include "dmcount/io.hpp"
#include "dmcount/losses.hpp"
#include "dmcount/metrics.hpp"
#include "dmcount/ot.hpp"
#include "dmcount/report.hpp"
#include "dmcount/smoothing.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void emit_report(const dmcount::RunReport& report,
                 const std::optional<fs::path>& file) {
  const std::string text = report.to_text();
  std::cout << text;
  if (file) {
    std::ofstream os(*file);
    if (!os) throw dmcount::IoError("cannot open " + file->string());
    os << text;
    if (!os) throw dmcount::IoError("write failed: " + file->string());
  }
}

// Matrix writer sharing the density-map container format but without the
// nonnegativity requirement; used for gradient dumps.
void write_matrix(const fs::path& path, const dmcount::GridArray<double>& g) {
  std::ofstream os(path);
  if (!os) throw dmcount::IoError("cannot open " + path.string());
  os << "P_DENS " << g.rows() << ' ' << g.cols() << '\n';
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      if (c > 0) os << ' ';
      os << dmcount::format_real(g(r, c));
    }
    os << '\n';
  }
  if (!os) throw dmcount::IoError("write failed: " + path.string());
}

std::vector<dmcount::CountPair> load_count_pairs(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw dmcount::IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw dmcount::IoError("pairs: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "truth,predicted")
    throw dmcount::IoError("pairs: expected 'truth,predicted' header");
  std::vector<dmcount::CountPair> pairs;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw dmcount::IoError("pairs: malformed line '" + line + "'");
    try {
      pairs.push_back({std::stod(line.substr(0, comma)),
                       std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw dmcount::IoError("pairs: malformed line '" + line + "'");
    }
  }
  return pairs;
}

struct ToyOpts {
  long rows = 64, cols = 64, dots = 115, max_iters = 200000;
  long sinkhorn_iters = 100;
  std::uint64_t seed = 0;
  double eta = 1e-5, stop_tol = 1e-9;
  double pixel_sigma = 4.0, bayes_sigma = 8.0;
  double lambda1 = 0.1, lambda2 = 0.01;
  double reg = 10.0, sinkhorn_tol = 1e-9, cost_scale = 1.0;
  bool cold_start = false;
  std::string out;
};

void run_toy(const ToyOpts& o) {
  const auto t0 = Clock::now();
  dmcount::CompareConfig cfg;
  cfg.eta = o.eta;
  cfg.max_iters = o.max_iters;
  cfg.stop_tol = o.stop_tol;
  cfg.seed = o.seed;
  cfg.warm_start = !o.cold_start;
  cfg.pixel_sigma = o.pixel_sigma;
  cfg.bayes_sigma = o.bayes_sigma;
  cfg.dm.lambda1 = o.lambda1;
  cfg.dm.lambda2 = o.lambda2;
  cfg.dm.cost_scale = o.cost_scale;
  cfg.dm.sinkhorn.reg = o.reg;
  cfg.dm.sinkhorn.max_iters = static_cast<int>(o.sinkhorn_iters);
  cfg.dm.sinkhorn.tolerance = o.sinkhorn_tol;

  const auto target =
      dmcount::synth_target<double>(o.rows, o.cols, o.dots, o.seed);

  dmcount::RunReport rep;
  rep.command = "toy";
  rep.input("rows", o.rows);
  rep.input("cols", o.cols);
  rep.input("dots", o.dots);
  rep.input("seed", static_cast<long>(o.seed));
  rep.input("eta", o.eta);
  rep.input("max_iters", o.max_iters);
  rep.input("stop_tol", o.stop_tol);
  rep.input("pixel_sigma", o.pixel_sigma);
  rep.input("bayes_sigma", o.bayes_sigma);
  rep.input("lambda1", o.lambda1);
  rep.input("lambda2", o.lambda2);
  rep.input("reg", o.reg);
  rep.input("sinkhorn_iters", o.sinkhorn_iters);
  rep.input("sinkhorn_tol", o.sinkhorn_tol);
  rep.input("cost_scale", o.cost_scale);
  rep.input("warm_start", cfg.warm_start ? "true" : "false");
  rep.input("out", o.out);

  const auto t_run = Clock::now();
  const auto report = dmcount::compare_losses(target, cfg);
  const double run_ms = ms_since(t_run);

  const auto t_write = Clock::now();
  fs::create_directories(o.out);
  double joint_max = 0.0;
  for (const auto& e : report.entries)
    if (e.result)
      joint_max = std::max(joint_max, e.result->final_map.values.maxCoeff());
  if (joint_max <= 0.0) joint_max = 1.0;

  rep.output("target.count", static_cast<long>(target.count()));
  for (const auto& e : report.entries) {
    if (!e.result) {
      rep.output(e.name + ".skipped", e.skip_reason);
      continue;
    }
    const auto& r = *e.result;
    rep.output(e.name + ".count", r.final_count);
    rep.output(e.name + ".count_error",
               std::abs(r.final_count - r.target_count));
    rep.output(e.name + ".psnr", r.psnr);
    rep.output(e.name + ".ssim", r.ssim);
    rep.output(e.name + ".iterations", r.iterations_run);
    if (!r.loss_trace.empty())
      rep.output(e.name + ".final_loss", r.loss_trace.back().second);
    dmcount::save_density_map(fs::path(o.out) / (e.name + ".dens"),
                              r.final_map);
    dmcount::save_pgm(fs::path(o.out) / (e.name + ".pgm"),
                      r.final_map.values, joint_max);
  }
  const auto rows = dmcount::ranking_table(report);
  const auto ranked_names = [&](auto key) {
    std::vector<const dmcount::RankedRow*> sorted;
    for (const auto& row : rows) sorted.push_back(&row);
    std::sort(sorted.begin(), sorted.end(),
              [&](auto* a, auto* b) { return key(*a) < key(*b); });
    std::string names;
    for (const auto* row : sorted) {
      if (!names.empty()) names += ",";
      names += row->name;
    }
    return names;
  };
  rep.output("ranking.count_error",
             ranked_names([](const auto& r) { return r.rank_count_error; }));
  rep.output("ranking.psnr",
             ranked_names([](const auto& r) { return r.rank_psnr; }));
  rep.output("ranking.ssim",
             ranked_names([](const auto& r) { return r.rank_ssim; }));
  rep.output("pgm.scale", joint_max);

  rep.timing_ms("run", run_ms);
  rep.timing_ms("write", ms_since(t_write));
  rep.timing_ms("total", ms_since(t0));
  emit_report(rep, fs::path(o.out) / "report.txt");
}

struct SinkhornOpts {
  std::string mu, nu;
  double reg = 10.0, tol = 1e-9, cost_scale = 1.0;
  long max_iters = 100;
  bool no_normalize = false;
};

void run_sinkhorn(const SinkhornOpts& o) {
  const auto t0 = Clock::now();
  auto mu = dmcount::load_density_map(o.mu);
  auto nu = dmcount::load_density_map(o.nu);
  dmcount::RunReport rep;
  rep.command = "sinkhorn";
  rep.input("mu", o.mu);
  rep.input("nu", o.nu);
  rep.input("reg", o.reg);
  rep.input("max_iters", o.max_iters);
  rep.input("tolerance", o.tol);
  rep.input("cost_scale", o.cost_scale);
  rep.input("normalize", o.no_normalize ? "false" : "true");
  rep.output("mu.mass", dmcount::total_mass(mu));
  rep.output("nu.mass", dmcount::total_mass(nu));
  if (!o.no_normalize) {
    mu = dmcount::normalize(mu);
    nu = dmcount::normalize(nu);
  }
  dmcount::SinkhornConfig cfg;
  cfg.reg = o.reg;
  cfg.max_iters = static_cast<int>(o.max_iters);
  cfg.tolerance = o.tol;
  const dmcount::GridCost cost{mu.rows(), mu.cols(), o.cost_scale};
  const auto t_run = Clock::now();
  const auto sol = dmcount::sinkhorn(mu, nu, cost, cfg);
  rep.output("value", sol.value);
  rep.output("iterations_run", static_cast<long>(sol.iterations_run));
  rep.output("marginal_error", sol.marginal_error);
  rep.output("c_inf", cost.max_cost());
  rep.timing_ms("run", ms_since(t_run));
  rep.timing_ms("total", ms_since(t0));
  emit_report(rep, std::nullopt);
}

struct LossOpts {
  std::string kind;
  std::string z, ann, zhat, grad_out;
  long rows = 0, cols = 0, sinkhorn_iters = 100;
  double sigma = 8.0, lambda1 = 0.1, lambda2 = 0.01;
  double reg = 10.0, sinkhorn_tol = 1e-9, cost_scale = 1.0;
};

void run_loss(const LossOpts& o) {
  const auto t0 = Clock::now();
  const auto zhat = dmcount::load_density_map(o.zhat);

  std::optional<dmcount::DotAnnotation> ann;
  std::optional<dmcount::DensityMap> z;
  if (!o.ann.empty()) {
    const long rows = o.rows > 0 ? o.rows : zhat.rows();
    const long cols = o.cols > 0 ? o.cols : zhat.cols();
    ann = dmcount::load_annotation(o.ann, rows, cols);
    z = dmcount::rasterize(*ann);
  } else if (!o.z.empty()) {
    z = dmcount::load_density_map(o.z);
  } else {
    throw CLI::ValidationError("loss", "either --z or --ann is required");
  }
  if (o.kind == "bayesian" && !ann)
    throw CLI::ValidationError("loss", "--kind bayesian requires --ann");

  dmcount::DmCountConfig cfg;
  cfg.lambda1 = o.lambda1;
  cfg.lambda2 = o.lambda2;
  cfg.cost_scale = o.cost_scale;
  cfg.sinkhorn.reg = o.reg;
  cfg.sinkhorn.max_iters = static_cast<int>(o.sinkhorn_iters);
  cfg.sinkhorn.tolerance = o.sinkhorn_tol;

  dmcount::LossEval ev;
  if (o.kind == "count") {
    ev = dmcount::count_loss(*z, zhat);
  } else if (o.kind == "ot") {
    ev = dmcount::ot_loss(*z, zhat, cfg);
  } else if (o.kind == "tv") {
    ev = dmcount::tv_loss(*z, zhat);
  } else if (o.kind == "dm_count") {
    ev = dmcount::dm_count_loss(*z, zhat, cfg);
  } else if (o.kind == "pixelwise_l1") {
    ev = dmcount::pixelwise_loss(*z, zhat, dmcount::PixelNorm::L1);
  } else if (o.kind == "pixelwise_l2") {
    ev = dmcount::pixelwise_loss(*z, zhat, dmcount::PixelNorm::L2);
  } else {
    ev = dmcount::bayesian_loss(*ann, zhat, dmcount::BayesianConfig{o.sigma});
  }

  dmcount::RunReport rep;
  rep.command = "loss";
  rep.input("kind", o.kind);
  if (!o.z.empty()) rep.input("z", o.z);
  if (!o.ann.empty()) rep.input("ann", o.ann);
  rep.input("zhat", o.zhat);
  if (o.kind == "bayesian") rep.input("sigma", o.sigma);
  if (o.kind == "ot" || o.kind == "dm_count") {
    rep.input("lambda1", o.lambda1);
    rep.input("lambda2", o.lambda2);
    rep.input("reg", o.reg);
    rep.input("sinkhorn_iters", o.sinkhorn_iters);
    rep.input("sinkhorn_tol", o.sinkhorn_tol);
    rep.input("cost_scale", o.cost_scale);
  }
  rep.output("value", ev.value);
  rep.output("grad.min", ev.grad.minCoeff());
  rep.output("grad.max", ev.grad.maxCoeff());
  rep.output("grad.l1", ev.grad.abs().sum());
  if (!o.grad_out.empty()) {
    write_matrix(o.grad_out, ev.grad);
    rep.output("grad.file", o.grad_out);
  }
  rep.timing_ms("total", ms_since(t0));
  emit_report(rep, std::nullopt);
}

struct SmoothOpts {
  std::string ann, out, pgm;
  long rows = 0, cols = 0, k = 3, radius = 0;
  double sigma = 8.0, beta = 0.3;
  bool adaptive = false;
};

void run_smooth(const SmoothOpts& o) {
  const auto t0 = Clock::now();
  const auto ann = dmcount::load_annotation(o.ann, o.rows, o.cols);
  dmcount::DensityMap result =
      o.adaptive
          ? dmcount::smooth_adaptive(ann, static_cast<int>(o.k), o.beta)
          : dmcount::smooth_fixed(
                ann, dmcount::KernelSpec(o.sigma, static_cast<int>(o.radius)));
  dmcount::save_density_map(o.out, result);

  dmcount::RunReport rep;
  rep.command = "smooth";
  rep.input("ann", o.ann);
  rep.input("rows", o.rows);
  rep.input("cols", o.cols);
  rep.input("mode", o.adaptive ? "adaptive" : "fixed");
  if (o.adaptive) {
    rep.input("k", o.k);
    rep.input("beta", o.beta);
  } else {
    rep.input("sigma", o.sigma);
  }
  rep.input("out", o.out);
  rep.output("dots", static_cast<long>(ann.count()));
  rep.output("mass", dmcount::total_mass(result));
  if (!o.pgm.empty()) {
    // Standalone heatmaps scale by the map's own max; the recorded scale
    // keeps images comparable across runs.
    const double scale = std::max(result.values.maxCoeff(),
                                  dmcount::machine_epsilon<double>());
    dmcount::save_pgm(o.pgm, result.values, scale);
    rep.output("pgm.scale", scale);
  }
  rep.timing_ms("total", ms_since(t0));
  emit_report(rep, std::nullopt);
}

struct MetricsOpts {
  std::string pairs, a, b;
};

void run_metrics(const MetricsOpts& o) {
  const auto t0 = Clock::now();
  dmcount::RunReport rep;
  rep.command = "metrics";
  if (!o.pairs.empty()) {
    rep.input("pairs", o.pairs);
    const auto pairs = load_count_pairs(o.pairs);
    const auto m = dmcount::count_metrics(pairs);
    rep.output("count", static_cast<long>(pairs.size()));
    rep.output("mae", m.mae);
    rep.output("rmse", m.rmse);
    rep.output("nae", m.nae);
    rep.output("nae.excluded", static_cast<long>(m.nae_excluded));
  } else {
    if (o.a.empty() || o.b.empty())
      throw CLI::ValidationError("metrics",
                                 "either --pairs or both --a and --b");
    rep.input("a", o.a);
    rep.input("b", o.b);
    const auto a = dmcount::load_density_map(o.a);
    const auto b = dmcount::load_density_map(o.b);
    rep.output("psnr", dmcount::psnr(a, b));
    if (a.rows() >= 11 && a.cols() >= 11) {
      rep.output("ssim", dmcount::ssim(a, b));
    } else {
      rep.output("ssim", "excluded");  // needs the 11x11 window
    }
  }
  rep.timing_ms("total", ms_since(t0));
  emit_report(rep, std::nullopt);
}

struct GradcheckOpts {
  std::uint64_t seed = 0;
  long cases = 20, rows = 6, cols = 6, sinkhorn_iters = 10000;
  double step = 1e-4, reg = 10.0, sinkhorn_tol = 1e-12, sigma = 8.0;
};

void run_gradcheck(const GradcheckOpts& o) {
  const auto t0 = Clock::now();
  dmcount::DmCountConfig cfg;
  cfg.sinkhorn.reg = o.reg;
  cfg.sinkhorn.max_iters = static_cast<int>(o.sinkhorn_iters);
  cfg.sinkhorn.tolerance = o.sinkhorn_tol;
  const auto results = dmcount::run_gradient_suite<double>(
      o.seed, static_cast<int>(o.cases), o.rows, o.cols, cfg,
      dmcount::BayesianConfig{o.sigma}, o.step);

  dmcount::RunReport rep;
  rep.command = "gradcheck";
  rep.input("seed", static_cast<long>(o.seed));
  rep.input("cases", o.cases);
  rep.input("rows", o.rows);
  rep.input("cols", o.cols);
  rep.input("step", o.step);
  rep.input("reg", o.reg);
  rep.input("sinkhorn_iters", o.sinkhorn_iters);
  rep.input("sinkhorn_tol", o.sinkhorn_tol);
  double overall = 0.0;
  for (const auto& r : results) {
    rep.output(r.loss + ".max_rel_error", r.max_rel_error);
    overall = std::max(overall, r.max_rel_error);
  }
  rep.output("max_rel_error", overall);
  rep.timing_ms("total", ms_since(t0));
  emit_report(rep, std::nullopt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-matching losses for crowd counting"};
  app.require_subcommand(1);

  auto toy = std::make_shared<ToyOpts>();
  auto* toy_cmd = app.add_subcommand(
      "toy", "gradient-descent comparison of the three losses");
  toy_cmd->add_option("--rows", toy->rows)->check(CLI::PositiveNumber);
  toy_cmd->add_option("--cols", toy->cols)->check(CLI::PositiveNumber);
  toy_cmd->add_option("--dots", toy->dots)->check(CLI::NonNegativeNumber);
  toy_cmd->add_option("--seed", toy->seed);
  toy_cmd->add_option("--out", toy->out)->required();
  toy_cmd->add_option("--eta", toy->eta)->check(CLI::PositiveNumber);
  toy_cmd->add_option("--max-iters", toy->max_iters)
      ->check(CLI::PositiveNumber);
  toy_cmd->add_option("--stop-tol", toy->stop_tol)
      ->check(CLI::NonNegativeNumber);
  toy_cmd->add_option("--pixel-sigma", toy->pixel_sigma)
      ->check(CLI::PositiveNumber);
  toy_cmd->add_option("--bayes-sigma", toy->bayes_sigma)
      ->check(CLI::PositiveNumber);
  toy_cmd->add_option("--lambda1", toy->lambda1)
      ->check(CLI::NonNegativeNumber);
  toy_cmd->add_option("--lambda2", toy->lambda2)
      ->check(CLI::NonNegativeNumber);
  toy_cmd->add_option("--reg", toy->reg)->check(CLI::PositiveNumber);
  toy_cmd->add_option("--sinkhorn-iters", toy->sinkhorn_iters)
      ->check(CLI::PositiveNumber);
  toy_cmd->add_option("--sinkhorn-tol", toy->sinkhorn_tol)
      ->check(CLI::NonNegativeNumber);
  toy_cmd->add_option("--cost-scale", toy->cost_scale)
      ->check(CLI::PositiveNumber);
  toy_cmd->add_flag("--cold-start", toy->cold_start,
                    "recompute Sinkhorn duals from scratch every iteration");
  toy_cmd->callback([toy] { run_toy(*toy); });

  auto sk = std::make_shared<SinkhornOpts>();
  auto* sk_cmd =
      app.add_subcommand("sinkhorn", "entropic OT between two density maps");
  sk_cmd->add_option("--mu", sk->mu)->required();
  sk_cmd->add_option("--nu", sk->nu)->required();
  sk_cmd->add_option("--reg", sk->reg)->check(CLI::PositiveNumber);
  sk_cmd->add_option("--max-iters", sk->max_iters)->check(CLI::PositiveNumber);
  sk_cmd->add_option("--tol", sk->tol)->check(CLI::NonNegativeNumber);
  sk_cmd->add_option("--cost-scale", sk->cost_scale)
      ->check(CLI::PositiveNumber);
  sk_cmd->add_flag("--no-normalize", sk->no_normalize,
                   "feed the maps to the solver unnormalized");
  sk_cmd->callback([sk] { run_sinkhorn(*sk); });

  auto lo = std::make_shared<LossOpts>();
  auto* lo_cmd =
      app.add_subcommand("loss", "evaluate one loss and its gradient");
  lo_cmd->add_option("--kind", lo->kind)
      ->required()
      ->check(CLI::IsMember({"count", "ot", "tv", "dm_count", "pixelwise_l1",
                             "pixelwise_l2", "bayesian"}));
  lo_cmd->add_option("--z", lo->z, "target density map file");
  lo_cmd->add_option("--ann", lo->ann, "target annotation CSV");
  lo_cmd->add_option("--rows", lo->rows)->check(CLI::PositiveNumber);
  lo_cmd->add_option("--cols", lo->cols)->check(CLI::PositiveNumber);
  lo_cmd->add_option("--zhat", lo->zhat)->required();
  lo_cmd->add_option("--sigma", lo->sigma)->check(CLI::PositiveNumber);
  lo_cmd->add_option("--lambda1", lo->lambda1)->check(CLI::NonNegativeNumber);
  lo_cmd->add_option("--lambda2", lo->lambda2)->check(CLI::NonNegativeNumber);
  lo_cmd->add_option("--reg", lo->reg)->check(CLI::PositiveNumber);
  lo_cmd->add_option("--sinkhorn-iters", lo->sinkhorn_iters)
      ->check(CLI::PositiveNumber);
  lo_cmd->add_option("--sinkhorn-tol", lo->sinkhorn_tol)
      ->check(CLI::NonNegativeNumber);
  lo_cmd->add_option("--cost-scale", lo->cost_scale)
      ->check(CLI::PositiveNumber);
  lo_cmd->add_option("--grad-out", lo->grad_out);
  lo_cmd->callback([lo] { run_loss(*lo); });

  auto sm = std::make_shared<SmoothOpts>();
  auto* sm_cmd =
      app.add_subcommand("smooth", "Gaussian pseudo ground truth from dots");
  sm_cmd->add_option("--ann", sm->ann)->required();
  sm_cmd->add_option("--rows", sm->rows)->required()->check(CLI::PositiveNumber);
  sm_cmd->add_option("--cols", sm->cols)->required()->check(CLI::PositiveNumber);
  sm_cmd->add_option("--sigma", sm->sigma)->check(CLI::PositiveNumber);
  sm_cmd->add_option("--radius", sm->radius)->check(CLI::PositiveNumber);
  sm_cmd->add_flag("--adaptive", sm->adaptive, "nearest-neighbor kernel width");
  sm_cmd->add_option("--k", sm->k)->check(CLI::PositiveNumber);
  sm_cmd->add_option("--beta", sm->beta)->check(CLI::PositiveNumber);
  sm_cmd->add_option("--out", sm->out)->required();
  sm_cmd->add_option("--pgm", sm->pgm);
  sm_cmd->callback([sm] { run_smooth(*sm); });

  auto me = std::make_shared<MetricsOpts>();
  auto* me_cmd =
      app.add_subcommand("metrics", "count metrics or map similarity");
  me_cmd->add_option("--pairs", me->pairs, "truth,predicted CSV");
  me_cmd->add_option("--a", me->a);
  me_cmd->add_option("--b", me->b);
  me_cmd->callback([me] { run_metrics(*me); });

  auto gc = std::make_shared<GradcheckOpts>();
  auto* gc_cmd = app.add_subcommand(
      "gradcheck", "finite-difference check of every loss gradient");
  gc_cmd->add_option("--seed", gc->seed);
  gc_cmd->add_option("--cases", gc->cases)->check(CLI::PositiveNumber);
  gc_cmd->add_option("--rows", gc->rows)->check(CLI::PositiveNumber);
  gc_cmd->add_option("--cols", gc->cols)->check(CLI::PositiveNumber);
  gc_cmd->add_option("--step", gc->step)->check(CLI::PositiveNumber);
  gc_cmd->add_option("--reg", gc->reg)->check(CLI::PositiveNumber);
  gc_cmd->add_option("--sinkhorn-iters", gc->sinkhorn_iters)
      ->check(CLI::PositiveNumber);
  gc_cmd->add_option("--sinkhorn-tol", gc->sinkhorn_tol)
      ->check(CLI::NonNegativeNumber);
  gc_cmd->add_option("--sigma", gc->sigma)->check(CLI::PositiveNumber);
  gc_cmd->callback([gc] { run_gradcheck(*gc); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const dmcount::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
