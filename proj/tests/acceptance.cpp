// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// hard failures (criterion 7 is a soft, report-producing check).
//
// Usage: acceptance <path-to-cli-binary>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "core/bench.hpp"
#include "core/defaults.hpp"
#include "core/gradcheck.hpp"
#include "core/loss.hpp"
#include "core/ridge.hpp"
#include "core/tracker.hpp"
#include "core/train.hpp"
#include "core/tensor_io.hpp"
#include "test_support.hpp"

using namespace ridgelayer;
using namespace testsupport;

namespace {

std::string g_cli;
std::filesystem::path g_scratch;
int g_hard_failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int criterion, const char* name, bool pass, const std::string& detail,
            bool soft = false) {
  std::printf("criterion %d (%s): %s%s  [%s]\n", criterion, name,
              pass ? "PASS" : "FAIL", soft && !pass ? " (soft)" : "",
              detail.c_str());
  std::fflush(stdout);
  if (!pass && !soft) ++g_hard_failures;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto out_path = g_scratch / ("cli_out_" + std::to_string(++counter));
  const std::string cmd =
      g_cli + " " + args + " > " + out_path.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.out = slurp(out_path);
  return res;
}

// ---- criteria 1 and 2: Woodbury equivalence + normal-equation residuals ----

void criteria_1_and_2() {
  const auto start = Clock::now();
  const double lambdas[3] = {1e-3, 0.1, 10.0};
  std::vector<std::pair<std::size_t, std::size_t>> configs = {
      {1, 1}, {1, 1024}, {961, 1}, {961, 1024}, {2, 3}, {31, 31}, {961, 1024}};
  Rng shape_rng(2024);
  while (configs.size() < 105) {
    // log-uniform over the spanned ranges
    const double un = shape_rng.uniform(), ud = shape_rng.uniform();
    const auto n = static_cast<std::size_t>(std::exp(un * std::log(961.0)));
    const auto d = static_cast<std::size_t>(std::exp(ud * std::log(1024.0)));
    configs.emplace_back(std::max<std::size_t>(1, n), std::max<std::size_t>(1, d));
  }

  Rng data_rng(77);
  double worst_delta = 0.0, worst_residual = 0.0;
  std::size_t solves = 0;
  bool agree = true, residual_ok = true;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto [n, d] = configs[k];
    const double lambda = lambdas[k % 3];
    const Matrix x = random_matrix(n, d, data_rng);
    const Vector y = random_vector(n, data_rng);
    const SolveRecord primal = ridge_forward(x, y, {lambda, RidgePath::kPrimal});
    const SolveRecord dual = ridge_forward(x, y, {lambda, RidgePath::kDual});
    const double scaled_delta =
        max_abs_diff(primal.weights().span(), dual.weights().span()) /
        (1.0 + max_abs(primal.weights().span()));
    worst_delta = std::max(worst_delta, scaled_delta);
    if (scaled_delta > 1e-8) agree = false;

    const double rhs_scale = 1.0 + max_abs(tmatvec(x, y).span());
    for (const SolveRecord* rec : {&primal, &dual}) {
      const double scaled_res = rec->normal_equation_residual() / rhs_scale;
      worst_residual = std::max(worst_residual, scaled_res);
      if (scaled_res > 1e-8) residual_ok = false;
      ++solves;
    }
  }
  const double elapsed = seconds_since(start);
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%zu configs, max scaled |w_primal - w_dual| = %.2e, %.1f s",
                configs.size(), worst_delta, elapsed);
  report(1, "Woodbury primal/dual equivalence", agree && elapsed < 120.0, detail);
  std::snprintf(detail, sizeof detail,
                "%zu solves, max scaled normal-equation residual = %.2e", solves,
                worst_residual);
  report(2, "normal-equation residual", residual_ok, detail);
}

// ---- criterion 3: implicit-differentiation correctness ----

double probe_loss(const Matrix& x, const Vector& y, const Vector& g, double lambda) {
  const Vector w = naive_ridge(x, y, lambda);
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) s += g[j] * w[j];
  return s;
}

void criterion_3() {
  const auto start = Clock::now();
  Rng rng(31);
  const double h = 1e-6;
  double worst_ridge = 0.0;
  for (const auto& [n, d] : {std::pair<std::size_t, std::size_t>{8, 5},
                            {5, 8},
                            {7, 7}}) {
    const Matrix x = random_matrix(n, d, rng);
    const Vector y = random_vector(n, rng);
    const Vector g = random_vector(d, rng);
    for (const RidgePath path : {RidgePath::kPrimal, RidgePath::kDual}) {
      const SolveRecord rec = ridge_forward(x, y, {0.1, path});
      const RidgeGradients grads = ridge_backward(rec, g);
      double scale = std::max(max_abs(grads.d_x.span()), max_abs(grads.d_y.span()));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          Matrix xp = x, xm = x;
          xp(i, j) += h;
          xm(i, j) -= h;
          const double fd =
              (probe_loss(xp, y, g, 0.1) - probe_loss(xm, y, g, 0.1)) / (2 * h);
          worst_ridge = std::max(worst_ridge, rel_err(fd, grads.d_x(i, j), scale));
        }
      for (std::size_t i = 0; i < n; ++i) {
        Vector yp = y, ym = y;
        yp[i] += h;
        ym[i] -= h;
        const double fd =
            (probe_loss(x, yp, g, 0.1) - probe_loss(x, ym, g, 0.1)) / (2 * h);
        worst_ridge = std::max(worst_ridge, rel_err(fd, grads.d_y[i], scale));
      }
    }
  }

  double worst_e2e = 0.0;
  for (const LossKind kind :
       {LossKind::kShrinkageModified, LossKind::kShrinkageOrigin, LossKind::kMse}) {
    const GradCheckReport rep = gradcheck_run(10, 6, kind, 5);
    worst_e2e = std::max(worst_e2e, rep.max_rel_end2end);
    worst_ridge = std::max(worst_ridge, rep.max_rel_ridge);
  }
  const double elapsed = seconds_since(start);
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "ridge max rel err %.2e (tol 1e-5), end-to-end %.2e (tol 1e-4), %.1f s",
                worst_ridge, worst_e2e, elapsed);
  report(3, "implicit-differentiation correctness",
         worst_ridge <= 1e-5 && worst_e2e <= 1e-4 && elapsed < 60.0, detail);
}

// ---- criterion 4: complexity behavior ----

void criterion_4() {
  const auto start = Clock::now();
  // Ratios carry the stated +/-20% tolerance: 3x becomes 3.6, 10x becomes 8.
  const std::size_t dims[4] = {512, 1024, 2048, 4096};
  double dual_min = 1e300, dual_max = 0.0;
  double primal_512 = 0.0, primal_4096 = 0.0;
  for (const std::size_t d : dims) {
    const BenchCell cell = bench_cell(256, d, 0.1, 3, 9);
    dual_min = std::min(dual_min, cell.dual.solve_ms);
    dual_max = std::max(dual_max, cell.dual.solve_ms);
    if (d == 512) primal_512 = cell.primal.solve_ms;
    if (d == 4096) primal_4096 = cell.primal.solve_ms;
    std::printf("  bench n=256 d=%zu: primal solve %.2f ms, dual solve %.2f ms\n", d,
                cell.primal.solve_ms, cell.dual.solve_ms);
  }
  const BenchCell operating = bench_cell(961, 1024, 0.1, 5, 9);
  std::printf("  bench n=961 d=1024: primal solve %.2f ms, dual solve %.2f ms, "
              "auto=%s (totals %.2f / %.2f ms)\n",
              operating.primal.solve_ms, operating.dual.solve_ms,
              operating.auto_is_dual ? "dual" : "primal", operating.primal.total_ms,
              operating.dual.total_ms);

  const double dual_variation = dual_max / std::max(dual_min, 1e-9);
  const double primal_growth = primal_4096 / std::max(primal_512, 1e-9);
  const bool pass = dual_variation < 3.0 * 1.2 && primal_growth > 10.0 * 0.8 &&
                    operating.auto_is_dual &&
                    operating.dual.solve_ms < operating.primal.solve_ms;
  const double elapsed = seconds_since(start);
  char detail[200];
  std::snprintf(detail, sizeof detail,
                "dual solve variation %.2fx (< 3.6), primal growth %.1fx (> 8), "
                "961x1024 dual/primal = %.2f, %.0f s",
                dual_variation, primal_growth,
                operating.dual.solve_ms / std::max(operating.primal.solve_ms, 1e-9), elapsed);
  report(4, "solve-stage complexity crossover", pass && elapsed < 300.0, detail);
}

// ---- criterion 5: shrinkage loss properties ----

void criterion_5() {
  bool pass = true;
  std::string failure;

  // equality on non-negative residuals
  Rng rng(51);
  Vector y(30), pred(30);
  for (std::size_t i = 0; i < 30; ++i) {
    y[i] = std::abs(rng.normal()) * 0.4;
    pred[i] = y[i] + std::abs(rng.normal());
  }
  const LossResult mod = shrinkage_modified(pred, y, {});
  const LossResult orig = shrinkage_origin(pred, y, {});
  if (mod.loss != orig.loss) {
    pass = false;
    failure = "nonneg-residual equality";
  }

  // modified strictly exceeds origin at r = -c
  const ShrinkageParams p{};
  const Vector y0(std::vector<double>{0.0});
  const Vector pm(std::vector<double>{-p.c});
  if (!(shrinkage_origin(pm, y0, p).loss < shrinkage_modified(pm, y0, p).loss)) {
    pass = false;
    failure = "origin < modified at r=-c";
  }

  // weight monotone in |r|
  double prev = -1.0;
  for (double r = 0.0; r <= 1.0; r += 0.005) {
    const double w = sigmoid(p.a * (r - p.c));
    if (w <= prev) {
      pass = false;
      failure = "weight monotonicity";
      break;
    }
    prev = w;
  }

  // gradient checks against the scalar closed forms
  double worst = 0.0;
  for (std::size_t i = 0; i < 30; ++i) {
    double r = rng.normal();
    if (std::abs(r) < 1e-2) r += r < 0 ? -1e-2 : 1e-2;
    pred[i] = y[i] + r;
  }
  for (const LossKind kind :
       {LossKind::kShrinkageModified, LossKind::kShrinkageOrigin}) {
    const LossResult res = evaluate_loss(kind, pred, y, p);
    for (std::size_t i = 0; i < 30; ++i) {
      const double h = 1e-7;
      Vector pp = pred, pmv = pred;
      pp[i] += h;
      pmv[i] -= h;
      const double fd = (evaluate_loss(kind, pp, y, p).loss -
                         evaluate_loss(kind, pmv, y, p).loss) /
                        (2 * h);
      worst = std::max(worst, rel_err(fd, res.d_pred[i], max_abs(res.d_pred.span())));
    }
  }
  if (worst > 1e-6) {
    pass = false;
    failure = "gradient check";
  }

  char detail[160];
  std::snprintf(detail, sizeof detail, "gradient max rel err %.2e%s%s", worst,
                pass ? "" : ", failed: ", pass ? "" : failure.c_str());
  report(5, "shrinkage loss properties", pass, detail);
}

// ---- criterion 6: stock hyperparameter defaults wired and echoed ----

void criterion_6() {
  bool pass = Defaults::kLambda == 0.1 && Defaults::kShrinkA == 10.0 &&
              Defaults::kShrinkC == 0.2 && Defaults::kUpdateRate == 0.01 &&
              Defaults::kLearnRate == 0.005 && Defaults::kGridSide == 31;
  std::string missing;

  const CliResult track = run_cli(
      "track --synthetic --frames 2 --dim 8 --out " +
      (g_scratch / "c6_traj.tsv").string());
  for (const char* token : {"lambda=0.1", "delta=0.01", "grid_side=31", "n=961",
                            "sigma_factor=0.1"})
    if (track.out.find(token) == std::string::npos) {
      pass = false;
      missing += std::string(" track:") + token;
    }

  const CliResult train = run_cli(
      "train --steps 1 --grid-side 9 --dim-in 6 --dim-out 3 --pairs 1 "
      "--checkpoint-every 0 --out-dir " +
      (g_scratch / "c6_train").string());
  for (const char* token : {"lr=0.005", "a=10", "c=0.2", "lambda=0.1"})
    if (train.out.find(token) == std::string::npos) {
      pass = false;
      missing += std::string(" train:") + token;
    }
  if (track.exit_code != 0 || train.exit_code != 0) pass = false;

  report(6, "stock defaults wired and echoed", pass,
         pass ? "lambda=0.1 a=10 c=0.2 delta=0.01 n=961 lr=0.005 all echoed"
              : "missing:" + missing);
}

// ---- criterion 7 (soft): shrinkage convergence on the imbalanced task ----

void criterion_7() {
  const auto start = Clock::now();
  TrainConfig cfg;
  cfg.steps = 300;
  cfg.num_pairs = 6;
  const double threshold = 0.10;

  bool pass = true;
  std::string detail;
  double easy_fraction = 0.0;
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    cfg.seed = seed;
    const TrainTask task = make_synthetic_task(cfg);
    std::size_t easy = 0;
    for (std::size_t i = 0; i < task.pairs[0].y_test.size(); ++i)
      if (task.pairs[0].y_test[i] < 0.1) ++easy;
    easy_fraction = static_cast<double>(easy) /
                    static_cast<double>(task.pairs[0].y_test.size());

    const auto out_dir = g_scratch / ("c7_seed" + std::to_string(seed));
    const CompareSummary summary =
        compare_losses_run(cfg, threshold, out_dir, nullptr);
    const std::size_t mse_steps = summary.curves[0].steps_to_threshold;
    const std::size_t mod_steps = summary.curves[2].steps_to_threshold;
    detail += "seed " + std::to_string(seed) + ": modified " +
              (mod_steps > cfg.steps ? "none" : std::to_string(mod_steps)) +
              " vs mse " +
              (mse_steps > cfg.steps ? "none" : std::to_string(mse_steps)) + "; ";
    if (!(mod_steps <= mse_steps)) pass = false;
  }
  char suffix[96];
  std::snprintf(suffix, sizeof suffix, "easy fraction %.2f, threshold %.2f, %.0f s",
                easy_fraction, threshold, seconds_since(start));
  report(7, "shrinkage convergence speed (soft)", pass && easy_fraction >= 0.9,
         detail + suffix, /*soft=*/true);
}

// ---- criterion 8: tracker loop ----

void criterion_8() {
  const auto start = Clock::now();
  SyntheticTrackConfig cfg;
  cfg.frames = 100;
  cfg.noise = 0.05;
  cfg.seed = 1;
  const TrackSummary summary = track_synthetic(cfg);
  const bool drift_ok = summary.mean_error < summary.spacing;

  // delta degenerate behavior, exact
  const SampleGrid grid({0, 0}, 150.0, 30.0, 30.0, 7);
  const SyntheticWorld world(12, 3);
  const Vector labels = gaussian_labels(grid, grid.region_center(), {});
  const Matrix f0 = world.features(grid, grid.region_center(), 0.0, 1);
  const Matrix f1 = world.features(grid, grid.region_center(), 0.1, 2);
  Tracker frozen(f0, labels, grid.region_center(), {0.1, 0.0});
  frozen.update(f1);
  const bool delta0_ok = bitwise_equal(frozen.data_matrix().span(), f0.span());
  Tracker replace(f0, labels, grid.region_center(), {0.1, 1.0});
  replace.update(f1);
  const bool delta1_ok = bitwise_equal(replace.data_matrix().span(), f1.span());

  const double elapsed = seconds_since(start);
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "mean error %.3f of a %.3f cell (%.2f cells), delta 0/1 exact: %s/%s, "
                "%.0f s",
                summary.mean_error, summary.spacing,
                summary.mean_error / summary.spacing, delta0_ok ? "yes" : "no",
                delta1_ok ? "yes" : "no", elapsed);
  report(8, "tracker loop on the drift sequence",
         drift_ok && delta0_ok && delta1_ok && elapsed < 60.0, detail);
}

// ---- criterion 9: CLI determinism ----

// Strips wall-clock noise: "# wall ..." lines and the timing columns of bench
// data rows (keeping n, d, path and the auto flag).
std::string normalize_stdout(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# wall", 0) == 0) continue;
    std::vector<std::string> fields;
    std::istringstream fl(line);
    std::string field;
    while (std::getline(fl, field, '\t')) fields.push_back(field);
    if (fields.size() == 7 && line[0] != '#' && fields[2] != "path") {
      out << fields[0] << '\t' << fields[1] << '\t' << fields[2] << '\t'
          << fields[6] << '\n';
    } else {
      out << line << '\n';
    }
  }
  return out.str();
}

bool same_file(const std::filesystem::path& a, const std::filesystem::path& b) {
  return slurp(a) == slurp(b);
}

void criterion_9() {
  bool pass = true;
  std::string failing;

  const auto dir = g_scratch / "det";
  std::filesystem::create_directories(dir);
  Rng rng(4);
  write_tensor(dir / "x.rlt", random_matrix(12, 7, rng));
  write_tensor(dir / "y.rlt", random_vector(12, rng));

  struct Command {
    const char* name;
    std::string args;                   // without run-specific outputs
    std::vector<std::string> outputs;   // relative artifact names to compare
  };
  const std::vector<Command> commands = {
      {"solve",
       "solve --x " + (dir / "x.rlt").string() + " --y " + (dir / "y.rlt").string() +
           " --lambda 0.1 --out {run}/w.rlt",
       {"w.rlt"}},
      {"gradcheck", "gradcheck --n 8 --d 5 --seed 3", {}},
      {"bench", "bench --n-list 16 --d-list 8,32 --reps 1 --seed 3", {}},
      {"track",
       "track --synthetic --frames 12 --grid-side 9 --dim 12 --seed 3 --out "
       "{run}/traj.tsv",
       {"traj.tsv"}},
      {"train",
       "train --steps 15 --grid-side 9 --dim-in 8 --dim-out 3 --pairs 3 --seed 3 "
       "--checkpoint-every 5 --out-dir {run}",
       {"metrics.tsv", "ckpt_000005.rlt", "ckpt_final.rlt"}},
      {"compare-losses",
       "compare-losses --steps 15 --grid-side 9 --dim-in 8 --dim-out 3 --pairs 3 "
       "--seed 3 --out-dir {run}",
       {"curves.tsv", "report.txt"}},
  };

  for (const Command& cmd : commands) {
    std::string outs[2];
    std::filesystem::path run_dirs[2];
    for (int run = 0; run < 2; ++run) {
      run_dirs[run] = dir / (std::string(cmd.name) + "_run" + std::to_string(run));
      std::filesystem::create_directories(run_dirs[run]);
      std::string args = cmd.args;
      std::size_t pos;
      while ((pos = args.find("{run}")) != std::string::npos)
        args.replace(pos, 5, run_dirs[run].string());
      const CliResult res = run_cli(args);
      if (res.exit_code != 0) {
        pass = false;
        failing += std::string(" ") + cmd.name + "(exit)";
      }
      // the echoed output paths intentionally differ between the two runs
      std::string text = res.out;
      while ((pos = text.find(run_dirs[run].string())) != std::string::npos)
        text.replace(pos, run_dirs[run].string().size(), "{run}");
      outs[run] = normalize_stdout(text);
    }
    if (outs[0] != outs[1]) {
      pass = false;
      failing += std::string(" ") + cmd.name + "(stdout)";
    }
    for (const std::string& artifact : cmd.outputs)
      if (!same_file(run_dirs[0] / artifact, run_dirs[1] / artifact)) {
        pass = false;
        failing += std::string(" ") + cmd.name + "(" + artifact + ")";
      }
  }

  report(9, "CLI determinism per seed", pass,
         pass ? "6 commands, repeated runs byte-identical (timing lines excluded)"
              : "mismatch:" + failing);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli>\n");
    return 1;
  }
  g_cli = argv[1];
  g_scratch = std::filesystem::temp_directory_path() / "ridgelayer_acceptance";
  std::filesystem::remove_all(g_scratch);
  std::filesystem::create_directories(g_scratch);

  criteria_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();

  std::printf("RESULT: %d hard failure(s); criterion 7 reports are under %s\n",
              g_hard_failures, (g_scratch.string() + "/c7_seed*").c_str());
  return g_hard_failures;
}
