#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

// Drives the installed CLI binary end to end. The binary path arrives as the
// last command-line argument (wired up by ctest).

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "core/tensor_io.hpp"
#include "core/sampling.hpp"
#include "test_support.hpp"

using namespace ridgelayer;
using namespace testsupport;

namespace {

std::string g_cli;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path();
  const auto out_path = dir / ("rl_cli_out_" + std::to_string(++counter));
  const auto err_path = dir / ("rl_cli_err_" + std::to_string(counter));
  const std::string cmd = g_cli + " " + args + " > " + out_path.string() + " 2> " +
                          err_path.string();
  const int raw = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.out = slurp(out_path);
  res.err = slurp(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return res;
}

Matrix identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("solve writes w = y/2 for the identity fixture") {
  const auto dir = temp_dir("cli_solve");
  write_tensor(dir / "x.rlt", identity(4));
  write_tensor(dir / "y.rlt", Vector(std::vector<double>{2, 4, 6, 8}));
  const std::string w_path = (dir / "w.rlt").string();
  const RunResult res = run_cli("solve --x " + (dir / "x.rlt").string() + " --y " +
                                (dir / "y.rlt").string() + " --lambda 1 --out " +
                                w_path);
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("# config: cmd=solve") != std::string::npos);
  CHECK(res.out.find("lambda=1") != std::string::npos);
  CHECK(res.out.find("# residual:") != std::string::npos);
  const Vector w = read_vector(w_path);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(w[i] == doctest::Approx(static_cast<double>(i + 1)).epsilon(1e-12));
}

TEST_CASE("solve paths agree on the same fixture") {
  const auto dir = temp_dir("cli_paths");
  Rng rng(71);
  write_tensor(dir / "x.rlt", random_matrix(12, 7, rng));
  write_tensor(dir / "y.rlt", random_vector(12, rng));
  const std::string base = "solve --x " + (dir / "x.rlt").string() + " --y " +
                           (dir / "y.rlt").string() + " --lambda 0.1 ";
  REQUIRE(run_cli(base + "--path primal --out " + (dir / "wp.rlt").string())
              .exit_code == 0);
  REQUIRE(run_cli(base + "--path dual --out " + (dir / "wd.rlt").string())
              .exit_code == 0);
  const Vector wp = read_vector(dir / "wp.rlt");
  const Vector wd = read_vector(dir / "wd.rlt");
  CHECK(max_abs_diff(wp.span(), wd.span()) <= 1e-8);
}

TEST_CASE("solve maps missing files and bad configs to documented exit codes") {
  const auto dir = temp_dir("cli_errors");
  const RunResult missing = run_cli("solve --x " + (dir / "absent.rlt").string() +
                                    " --y " + (dir / "absent.rlt").string());
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("absent.rlt") != std::string::npos);

  std::ofstream(dir / "junk.rlt") << "not a tensor";
  write_tensor(dir / "y.rlt", Vector(std::vector<double>{1}));
  const RunResult junk = run_cli("solve --x " + (dir / "junk.rlt").string() +
                                 " --y " + (dir / "y.rlt").string());
  CHECK(junk.exit_code == 2);

  write_tensor(dir / "x.rlt", identity(1));
  const RunResult bad_lambda =
      run_cli("solve --x " + (dir / "x.rlt").string() + " --y " +
              (dir / "y.rlt").string() + " --lambda 0");
  CHECK(bad_lambda.exit_code == 3);

  const RunResult unknown_flag = run_cli("solve --no-such-flag");
  CHECK(unknown_flag.exit_code == 2);
}

TEST_CASE("gradcheck passes at the documented sizes and losses") {
  CHECK(run_cli("gradcheck").exit_code == 0);
  CHECK(run_cli("gradcheck --d 20 --n 8").exit_code == 0);
  CHECK(run_cli("gradcheck --loss origin").exit_code == 0);
  CHECK(run_cli("gradcheck --loss mse --seed 5").exit_code == 0);
  const RunResult res = run_cli("gradcheck --n 6 --d 9 --seed 2");
  CHECK(res.out.find("verdict: PASS") != std::string::npos);
}

TEST_CASE("gradcheck reports assertion failures with exit code 4") {
  // lambda at rounding scale destroys the conditioning of the check
  const RunResult res = run_cli("gradcheck --lambda 1e-12 --seed 1");
  CHECK(res.exit_code == 4);
  CHECK(res.out.find("verdict: FAIL") != std::string::npos);
}

TEST_CASE("default train config cuts the loss by far more than half") {
  const auto dir = temp_dir("cli_train_default");
  const RunResult res = run_cli("train --seed 1 --out-dir " + dir.string());
  REQUIRE(res.exit_code == 0);
  const auto pos = res.out.find("ratio: ");
  REQUIRE(pos != std::string::npos);
  const double ratio = std::strtod(res.out.c_str() + pos + 7, nullptr);
  CHECK(ratio < 0.5);
}

TEST_CASE("bench reports both paths with the auto flag") {
  const RunResult res = run_cli("bench --n-list 8,24 --d-list 16 --reps 1 --seed 3");
  REQUIRE(res.exit_code == 0);
  std::istringstream lines(res.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#' && line.rfind("n\t", 0) != 0)
      rows.push_back(line);
  REQUIRE(rows.size() == 4);  // two cells x two paths
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  CHECK(rows[0].rfind("8\t16\tprimal", 0) == 0);
  CHECK(ends_with(rows[0], "\tdual"));    // auto column: d > n
  CHECK(rows[2].rfind("24\t16\tprimal", 0) == 0);
  CHECK(ends_with(rows[2], "\tprimal"));  // auto column: d <= n

  // n == d resolves to primal by the tie rule
  const RunResult tie = run_cli("bench --n-list 16 --d-list 16 --reps 1 --seed 3");
  REQUIRE(tie.exit_code == 0);
  CHECK(tie.out.find("16\t16\tprimal") != std::string::npos);
  std::istringstream tie_lines(tie.out);
  while (std::getline(tie_lines, line))
    if (!line.empty() && line[0] != '#' && line.rfind("n\t", 0) != 0)
      CHECK(ends_with(line, "\tprimal"));
}

TEST_CASE("static synthetic target tracks with zero error") {
  const auto dir = temp_dir("cli_track");
  const std::string traj = (dir / "traj.tsv").string();
  const RunResult res = run_cli(
      "track --synthetic --frames 6 --noise 0 --drift 0 --grid-side 9 --dim 12 "
      "--seed 4 --out " +
      traj);
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("mean_center_error: 0 ") != std::string::npos);
  // every per-frame error in the trajectory is zero
  std::ifstream in(traj);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto last_tab = line.rfind('\t');
    CHECK(line.substr(last_tab + 1) == "0");
  }
}

TEST_CASE("track accepts the degenerate delta=1 rate") {
  const auto dir = temp_dir("cli_track_d1");
  const RunResult res = run_cli(
      "track --synthetic --frames 4 --grid-side 9 --dim 8 --delta 1.0 --out " +
      (dir / "t.tsv").string());
  CHECK(res.exit_code == 0);
}

TEST_CASE("track drives per-frame feature files with ground truth") {
  const auto dir = temp_dir("cli_track_files");
  const SampleGrid grid({50.0, 50.0}, 120.0, 24.0, 24.0, 5);
  const SyntheticWorld world(10, 21);
  for (int t = 0; t < 3; ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "f%02d.rlt", t);
    write_tensor(dir / name, world.features(grid, {50.0, 50.0}, 0.0, 300 + t));
  }
  std::ofstream(dir / "gt.txt") << "50 50\n50 50\n50 50\n";
  const RunResult res = run_cli(
      "track --frames-dir " + dir.string() + " --gt " + (dir / "gt.txt").string() +
      " --grid-side 5 --region-size 120 --target-w 24 --target-h 24 "
      "--init-x 50 --init-y 50 --out " +
      (dir / "traj.tsv").string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("mean_center_error: 0 ") != std::string::npos);

  // without --init-x/--init-y the first ground-truth line seeds the start
  const RunResult seeded = run_cli(
      "track --frames-dir " + dir.string() + " --gt " + (dir / "gt.txt").string() +
      " --grid-side 5 --region-size 120 --target-w 24 --target-h 24 --out " +
      (dir / "traj2.tsv").string());
  REQUIRE(seeded.exit_code == 0);
  CHECK(seeded.out.find("init=(50,50)") != std::string::npos);
  CHECK(seeded.out.find("mean_center_error: 0 ") != std::string::npos);

  // neither init flags nor ground truth is an input error
  const RunResult neither = run_cli(
      "track --frames-dir " + dir.string() +
      " --grid-side 5 --region-size 120 --target-w 24 --target-h 24 --out " +
      (dir / "traj3.tsv").string());
  CHECK(neither.exit_code == 2);
}

TEST_CASE("train runs deterministically and logs metrics") {
  const auto dir_a = temp_dir("cli_train_a");
  const auto dir_b = temp_dir("cli_train_b");
  const std::string flags =
      "train --steps 20 --grid-side 9 --dim-in 8 --dim-out 3 --pairs 3 --seed 6 "
      "--checkpoint-every 10 --out-dir ";
  const RunResult a = run_cli(flags + dir_a.string());
  const RunResult b = run_cli(flags + dir_b.string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(a.out.find("# config: cmd=train") != std::string::npos);
  CHECK(a.out.find("lr=0.005") != std::string::npos);
  CHECK(slurp(dir_a / "metrics.tsv") == slurp(dir_b / "metrics.tsv"));
  CHECK(slurp(dir_a / "ckpt_final.rlt") == slurp(dir_b / "ckpt_final.rlt"));
}

TEST_CASE("compare-losses emits three aligned curves") {
  const auto dir = temp_dir("cli_compare");
  const RunResult res = run_cli(
      "compare-losses --steps 15 --grid-side 9 --dim-in 8 --dim-out 3 --pairs 3 "
      "--seed 6 --out-dir " +
      dir.string());
  REQUIRE(res.exit_code == 0);
  std::ifstream curves(dir / "curves.tsv");
  std::string header;
  std::getline(curves, header);
  CHECK(header ==
        "step\tloss_mse\tloss_origin\tloss_modified\tval_mse\tval_origin\tval_modified");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(curves, line)) ++rows;
  CHECK(rows == 15);
  CHECK(res.out.find("steps_to_threshold") != std::string::npos);
}

int main(int argc, char** argv) {
  // the CLI binary path is appended by ctest as the final argument
  if (argc > 1 && argv[argc - 1][0] != '-') {
    g_cli = argv[argc - 1];
    --argc;
  }
  if (g_cli.empty()) {
    std::fprintf(stderr, "usage: test_cli [doctest flags] <path-to-cli>\n");
    return 1;
  }
  doctest::Context ctx;
  ctx.applyCommandLine(argc, argv);
  return ctx.run();
}
