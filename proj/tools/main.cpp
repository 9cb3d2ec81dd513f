// ridgelayer command-line tool. Thin shell over the C API: parse flags, echo
// the resolved configuration, call the library, format the results.
//
// Exit codes: 0 success, 2 input/format error, 3 numerical/solver error,
// 4 gradient-check assertion failure.

#include <cinttypes>
#include <fstream>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ridgelayer.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAssert = 4;

bool g_verbose = false;

int exit_code_for(rl_status status) {
  switch (status) {
    case RL_OK:
      return kExitOk;
    case RL_ERR_FORMAT:
    case RL_ERR_IO:
      return kExitInput;
    default:
      return kExitNumeric;
  }
}

int fail(rl_status status) {
  std::fprintf(stderr, "error: %s\n", rl_last_error());
  return exit_code_for(status);
}

struct TensorDeleter {
  void operator()(rl_tensor* t) const { rl_tensor_free(t); }
};
using TensorPtr = std::unique_ptr<rl_tensor, TensorDeleter>;

const char* path_name(const std::string& p) {
  if (p == "primal") return "primal";
  if (p == "dual") return "dual";
  return "auto";
}

rl_path parse_path(const std::string& p) {
  if (p == "primal") return RL_PATH_PRIMAL;
  if (p == "dual") return RL_PATH_DUAL;
  return RL_PATH_AUTO;
}

rl_loss_kind parse_loss(const std::string& name) {
  if (name == "origin") return RL_LOSS_SHRINKAGE_ORIGIN;
  if (name == "mse") return RL_LOSS_MSE;
  return RL_LOSS_SHRINKAGE_MODIFIED;
}

std::vector<int64_t> parse_int_list(const std::string& csv) {
  std::vector<int64_t> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string token = csv.substr(pos, comma == std::string::npos
                                                  ? std::string::npos
                                                  : comma - pos);
    if (!token.empty()) {
      std::size_t used = 0;
      int64_t value = 0;
      try {
        value = std::stoll(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || value <= 0)
        throw std::runtime_error("expected positive integers in list, got '" +
                                 token + "'");
      out.push_back(value);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// ---- solve --------------------------------------------------------------

struct SolveArgs {
  std::string x_file, y_file, out_file = "w.rlt";
  double lambda;
  std::string path = "auto";
};

int cmd_solve(const SolveArgs& args) {
  std::printf("# config: cmd=solve x=%s y=%s lambda=%g path=%s out=%s\n",
              args.x_file.c_str(), args.y_file.c_str(), args.lambda,
              path_name(args.path), args.out_file.c_str());

  rl_tensor* x_raw = nullptr;
  if (const rl_status s = rl_tensor_read(args.x_file.c_str(), &x_raw); s != RL_OK)
    return fail(s);
  TensorPtr x(x_raw);
  rl_tensor* y_raw = nullptr;
  if (const rl_status s = rl_tensor_read(args.y_file.c_str(), &y_raw); s != RL_OK)
    return fail(s);
  TensorPtr y(y_raw);
  if (rl_tensor_rank(x.get()) != 2 || rl_tensor_rank(y.get()) != 1) {
    std::fprintf(stderr, "error: --x must be a rank-2 tensor and --y rank-1\n");
    return kExitInput;
  }
  if (g_verbose)
    std::printf("# shapes: x %lld x %lld, y %lld\n",
                static_cast<long long>(rl_tensor_dim(x.get(), 0)),
                static_cast<long long>(rl_tensor_dim(x.get(), 1)),
                static_cast<long long>(rl_tensor_dim(y.get(), 0)));

  rl_solve_record* rec = nullptr;
  if (const rl_status s =
          rl_ridge_solve(x.get(), y.get(), args.lambda, parse_path(args.path), &rec);
      s != RL_OK)
    return fail(s);
  std::unique_ptr<rl_solve_record, decltype(&rl_solve_record_free)> rec_guard(
      rec, rl_solve_record_free);

  double residual = 0.0;
  if (const rl_status s = rl_solve_record_residual(rec, &residual); s != RL_OK)
    return fail(s);
  rl_tensor* w_raw = nullptr;
  if (const rl_status s = rl_solve_record_weights(rec, &w_raw); s != RL_OK)
    return fail(s);
  TensorPtr w(w_raw);
  if (const rl_status s = rl_tensor_write(args.out_file.c_str(), w.get()); s != RL_OK)
    return fail(s);

  std::printf("# path_taken: %s\n",
              rl_solve_record_path(rec) == RL_PATH_DUAL ? "dual" : "primal");
  std::printf("# residual: %.3e\n", residual);
  std::printf("# wrote: %s\n", args.out_file.c_str());
  return kExitOk;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckArgs {
  int64_t n = 10, d = 6;
  std::string loss = "modified";
  std::uint64_t seed = 1;
  double lambda;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  std::printf("# config: cmd=gradcheck n=%" PRId64 " d=%" PRId64
              " loss=%s seed=%" PRIu64 " lambda=%g\n",
              args.n, args.d, args.loss.c_str(), args.seed, args.lambda);
  double ridge_err = 0.0, end2end_err = 0.0;
  if (const rl_status s = rl_gradcheck(args.n, args.d, parse_loss(args.loss),
                                       args.seed, args.lambda, &ridge_err,
                                       &end2end_err);
      s != RL_OK)
    return fail(s);
  std::printf("max_rel_error\tridge_backward\t%.6e\n", ridge_err);
  std::printf("max_rel_error\tend_to_end\t%.6e\n", end2end_err);
  const bool pass = ridge_err <= 1e-4 && end2end_err <= 1e-4;
  std::printf("verdict: %s (threshold 1e-4)\n", pass ? "PASS" : "FAIL");
  return pass ? kExitOk : kExitAssert;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string n_list = "256";
  std::string d_list = "512,1024,2048,4096";
  int32_t reps = 3;
  std::uint64_t seed = 1;
  double lambda;
};

int cmd_bench(const BenchArgs& args) {
  std::printf("# config: cmd=bench n_list=%s d_list=%s reps=%d seed=%" PRIu64
              " lambda=%g\n",
              args.n_list.c_str(), args.d_list.c_str(), args.reps, args.seed,
              args.lambda);
  std::printf("# gram_ms = normal-system assembly; solve_ms = factor+substitute\n");
  std::printf("n\td\tpath\tgram_ms\tsolve_ms\ttotal_ms\tauto\n");
  for (const int64_t n : parse_int_list(args.n_list)) {
    for (const int64_t d : parse_int_list(args.d_list)) {
      rl_bench_times primal{}, dual{};
      int32_t auto_is_dual = 0;
      if (const rl_status s = rl_bench_cell(n, d, args.lambda, args.reps, args.seed,
                                            &primal, &dual, &auto_is_dual);
          s != RL_OK)
        return fail(s);
      const char* auto_name = auto_is_dual ? "dual" : "primal";
      std::printf("%" PRId64 "\t%" PRId64 "\tprimal\t%.3f\t%.3f\t%.3f\t%s\n", n, d,
                  primal.gram_ms, primal.solve_ms, primal.total_ms, auto_name);
      std::printf("%" PRId64 "\t%" PRId64 "\tdual\t%.3f\t%.3f\t%.3f\t%s\n", n, d,
                  dual.gram_ms, dual.solve_ms, dual.total_ms, auto_name);
    }
  }
  return kExitOk;
}

// ---- track ------------------------------------------------------------------

struct TrackArgs {
  bool synthetic = false;
  std::string frames_dir;
  std::string gt_file;
  std::string out_file = "trajectory.tsv";
  rl_track_synth_config synth{};
  double init_x = 0.0, init_y = 0.0;
  bool has_init = false;
  double region_size = 0.0;
};

int cmd_track(const TrackArgs& args) {
  rl_track_summary summary{};
  if (args.synthetic) {
    const auto& c = args.synth;
    std::printf("# config: cmd=track mode=synthetic frames=%" PRId64
                " grid_side=%d n=%d dim=%" PRId64
                " noise=%g drift=%g lambda=%g delta=%g sigma_factor=%g seed=%" PRIu64
                " out=%s\n",
                c.frames, c.grid_side, c.grid_side * c.grid_side, c.dim, c.noise,
                c.drift, c.lambda, c.delta, c.sigma_factor, c.seed,
                args.out_file.c_str());
    if (const rl_status s = rl_track_synthetic(&c, args.out_file.c_str(), &summary);
        s != RL_OK)
      return fail(s);
  } else {
    const auto& c = args.synth;  // shares grid/rate flags with synthetic mode
    double init_x = args.init_x, init_y = args.init_y;
    if (!args.has_init) {
      // without explicit flags the first ground-truth line seeds the start
      std::ifstream gt(args.gt_file);
      if (args.gt_file.empty() || !(gt >> init_x >> init_y)) {
        std::fprintf(stderr,
                     "error: file mode needs --init-x/--init-y or a readable --gt\n");
        return kExitInput;
      }
    }
    std::printf("# config: cmd=track mode=files frames_dir=%s gt=%s grid_side=%d "
                "init=(%g,%g) lambda=%g delta=%g sigma_factor=%g out=%s\n",
                args.frames_dir.c_str(),
                args.gt_file.empty() ? "-" : args.gt_file.c_str(), c.grid_side,
                init_x, init_y, c.lambda, c.delta, c.sigma_factor,
                args.out_file.c_str());
    if (const rl_status s = rl_track_files(
            args.frames_dir.c_str(), args.gt_file.empty() ? nullptr : args.gt_file.c_str(),
            init_x, init_y, c.grid_side, args.region_size, c.target_w,
            c.target_h, c.sigma_factor, c.lambda, c.delta, args.out_file.c_str(),
            &summary);
        s != RL_OK)
      return fail(s);
  }
  if (g_verbose) {
    std::ifstream traj(args.out_file);
    std::string line;
    while (std::getline(traj, line)) std::printf("# frame: %s\n", line.c_str());
  }
  std::printf("frames: %" PRId64 "\n", summary.frames);
  std::printf("grid_cell: %.6g\n", summary.spacing);
  std::printf("mean_center_error: %.6g (%.4g grid cells)\n", summary.mean_error,
              summary.spacing > 0.0 ? summary.mean_error / summary.spacing : 0.0);
  std::printf("# wrote: %s\n", args.out_file.c_str());
  return kExitOk;
}

// ---- train / compare-losses -------------------------------------------------

struct TrainArgs {
  rl_train_config cfg{};
  std::string out_dir = "train_out";
  std::string loss = "modified";
  double threshold = 0.10;  // compare-losses validation threshold
};

void echo_train_config(const char* cmd, const TrainArgs& args) {
  const auto& c = args.cfg;
  std::printf("# config: cmd=%s steps=%" PRId64 " lr=%g loss=%s seed=%" PRIu64
              " batch=%" PRId64 " grid_side=%d n=%d dim_in=%" PRId64
              " dim_out=%" PRId64 " noise=%g lambda=%g a=%g c=%g out_dir=%s\n",
              cmd, c.steps, c.lr, args.loss.c_str(), c.seed, c.batch_pairs,
              c.grid_side, c.grid_side * c.grid_side, c.dim_in, c.dim_out, c.noise,
              c.lambda, c.shrink_a, c.shrink_c, args.out_dir.c_str());
}

int cmd_train(TrainArgs& args) {
  args.cfg.loss = parse_loss(args.loss);
  echo_train_config("train", args);
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  rl_train_summary summary{};
  if (const rl_status s = rl_train_run(&args.cfg, args.out_dir.c_str(), 1, &summary);
      s != RL_OK)
    return fail(s);
  std::printf("initial_loss: %.10g\n", summary.initial_loss);
  std::printf("final_loss: %.10g\n", summary.final_loss);
  std::printf("ratio: %.6g\n", summary.initial_loss > 0.0
                                   ? summary.final_loss / summary.initial_loss
                                   : 0.0);
  std::printf("# wrote: %s/metrics.tsv\n", args.out_dir.c_str());
  return kExitOk;
}

int cmd_compare_losses(TrainArgs& args) {
  args.cfg.loss = parse_loss(args.loss);
  echo_train_config("compare-losses", args);
  std::printf("# threshold: %g\n", args.threshold);
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  rl_compare_summary summary{};
  if (const rl_status s =
          rl_compare_losses(&args.cfg, args.threshold, args.out_dir.c_str(), &summary);
      s != RL_OK)
    return fail(s);
  auto print_steps = [&](const char* name, int64_t steps) {
    if (steps > args.cfg.steps)
      std::printf("steps_to_threshold\t%s\tnot_reached\n", name);
    else
      std::printf("steps_to_threshold\t%s\t%" PRId64 "\n", name, steps);
  };
  print_steps("mse", summary.steps_to_threshold_mse);
  print_steps("origin", summary.steps_to_threshold_origin);
  print_steps("modified", summary.steps_to_threshold_modified);
  std::printf("modified_not_slower_than_mse: %s\n",
              summary.modified_not_slower_than_mse ? "yes" : "no");
  std::printf("# wrote: %s/curves.tsv %s/report.txt\n", args.out_dir.c_str(),
              args.out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  rl_defaults_t defaults{};
  rl_get_defaults(&defaults);

  CLI::App app{"closed-form ridge regression layer, losses, tracking and training"};
  app.require_subcommand(1);
  int32_t threads = 0;
  app.add_option("--threads", threads, "cap kernel parallelism (0 = auto)");
  app.add_flag("--verbose", g_verbose, "extra per-frame / per-shape diagnostics");

  SolveArgs solve_args;
  solve_args.lambda = defaults.lambda;
  auto* solve = app.add_subcommand("solve", "solve min |Xw-y|^2 + lambda |w|^2");
  solve->add_option("--x", solve_args.x_file, "RLT1 matrix, n x d")->required();
  solve->add_option("--y", solve_args.y_file, "RLT1 vector, length n")->required();
  solve->add_option("--lambda", solve_args.lambda, "regularization, > 0");
  solve->add_option("--path", solve_args.path, "auto|primal|dual")
      ->check(CLI::IsMember({"auto", "primal", "dual"}));
  solve->add_option("--out", solve_args.out_file, "output weights tensor");

  GradcheckArgs grad_args;
  grad_args.lambda = defaults.lambda;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "backward pass vs central differences");
  gradcheck->add_option("--n", grad_args.n, "samples");
  gradcheck->add_option("--d", grad_args.d, "features");
  gradcheck->add_option("--loss", grad_args.loss, "modified|origin|mse")
      ->check(CLI::IsMember({"modified", "origin", "mse"}));
  gradcheck->add_option("--seed", grad_args.seed, "rng seed");
  gradcheck->add_option("--lambda", grad_args.lambda, "regularization");

  BenchArgs bench_args;
  bench_args.lambda = defaults.lambda;
  auto* bench = app.add_subcommand("bench", "primal vs dual solve timings");
  bench->add_option("--n-list", bench_args.n_list, "comma-separated sample counts");
  bench->add_option("--d-list", bench_args.d_list, "comma-separated feature dims");
  bench->add_option("--reps", bench_args.reps, "repetitions per cell (median)");
  bench->add_option("--seed", bench_args.seed, "rng seed");
  bench->add_option("--lambda", bench_args.lambda, "regularization");

  TrackArgs track_args;
  rl_track_synth_config_default(&track_args.synth);
  auto* track = app.add_subcommand("track", "online tracking loop");
  track->add_flag("--synthetic", track_args.synthetic, "drifting synthetic target");
  track->add_option("--frames", track_args.synth.frames, "synthetic frame count");
  track->add_option("--frames-dir", track_args.frames_dir,
                    "directory of per-frame RLT1 matrices");
  track->add_option("--gt", track_args.gt_file, "ground truth, one 'cx cy' per line");
  track->add_option("--grid-side", track_args.synth.grid_side, "odd lattice side");
  track->add_option("--dim", track_args.synth.dim, "synthetic feature dim");
  track->add_option("--noise", track_args.synth.noise, "synthetic feature noise");
  track->add_option("--drift", track_args.synth.drift, "target drift, cells/frame");
  track->add_option("--lambda", track_args.synth.lambda, "regularization");
  track->add_option("--delta", track_args.synth.delta, "update rate in [0,1]");
  track->add_option("--sigma-factor", track_args.synth.sigma_factor,
                    "label bandwidth fraction");
  track->add_option("--target-w", track_args.synth.target_w, "target width");
  track->add_option("--target-h", track_args.synth.target_h, "target height");
  track->add_option("--seed", track_args.synth.seed, "rng seed");
  auto* init_x_opt =
      track->add_option("--init-x", track_args.init_x, "file mode: initial center x");
  track->add_option("--init-y", track_args.init_y, "file mode: initial center y")
      ->needs(init_x_opt);
  track->add_option("--region-size", track_args.region_size,
                    "file mode: region side (default from target size)");
  track->add_option("--out", track_args.out_file, "trajectory TSV path");

  TrainArgs train_args;
  rl_train_config_default(&train_args.cfg);
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--steps", train_args.cfg.steps, "optimizer steps");
    cmd->add_option("--lr", train_args.cfg.lr, "learning rate");
    cmd->add_option("--loss", train_args.loss, "modified|origin|mse")
        ->check(CLI::IsMember({"modified", "origin", "mse"}));
    cmd->add_option("--seed", train_args.cfg.seed, "rng seed");
    cmd->add_option("--batch", train_args.cfg.batch_pairs, "pairs per step");
    cmd->add_option("--grid-side", train_args.cfg.grid_side, "odd lattice side");
    cmd->add_option("--dim-in", train_args.cfg.dim_in, "raw feature dim");
    cmd->add_option("--dim-out", train_args.cfg.dim_out, "embedding dim");
    cmd->add_option("--noise", train_args.cfg.noise, "raw feature noise");
    cmd->add_option("--sigma-factor", train_args.cfg.sigma_factor,
                    "label bandwidth fraction (wider = more foreground)");
    cmd->add_option("--lambda", train_args.cfg.lambda, "regularization");
    cmd->add_option("--a", train_args.cfg.shrink_a, "shrinkage speed");
    cmd->add_option("--c", train_args.cfg.shrink_c, "shrinkage localization");
    cmd->add_option("--pairs", train_args.cfg.num_pairs, "task pairs");
    cmd->add_option("--checkpoint-every", train_args.cfg.checkpoint_every,
                    "steps between checkpoints");
    cmd->add_option("--out-dir", train_args.out_dir, "output directory");
  };
  auto* train = app.add_subcommand("train", "toy embedding training");
  add_train_flags(train);
  auto* compare = app.add_subcommand("compare-losses",
                                     "mse vs origin vs modified shrinkage");
  add_train_flags(compare);
  compare->add_option("--threshold", train_args.threshold,
                      "validation error threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return kExitInput;
  }

  if (threads > 0) rl_set_threads(threads);

  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (gradcheck->parsed()) return cmd_gradcheck(grad_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (track->parsed()) {
      track_args.has_init = init_x_opt->count() > 0;
      if (!track_args.synthetic && track_args.frames_dir.empty()) {
        std::fprintf(stderr, "error: track needs --synthetic or --frames-dir\n");
        return kExitInput;
      }
      return cmd_track(track_args);
    }
    if (train->parsed()) return cmd_train(train_args);
    if (compare->parsed()) return cmd_compare_losses(train_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
