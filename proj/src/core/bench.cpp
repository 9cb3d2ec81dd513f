#include "core/bench.hpp"

#include <algorithm>
#include <chrono>
#include <utility>
#include <vector>

#include "core/cholesky.hpp"
#include "core/rng.hpp"

namespace ridgelayer {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// One timed forward solve; the sink keeps the result observable so the work
// cannot be elided.
StageTimes run_path(const Matrix& x, const Vector& y, double lambda, bool dual,
                    volatile double* sink) {
  const auto t0 = Clock::now();
  Matrix gram = dual ? gram_xxt(x) : gram_xtx(x);
  Vector rhs = dual ? y : tmatvec(x, y);
  const auto t1 = Clock::now();
  add_to_diagonal(gram, lambda);
  CholeskyFactor factor(std::move(gram));
  Vector w = factor.solve(rhs);
  if (dual) w = tmatvec(x, w);
  const auto t2 = Clock::now();
  *sink = *sink + w[0];
  StageTimes times;
  times.gram_ms = ms_between(t0, t1);
  times.solve_ms = ms_between(t1, t2);
  times.total_ms = ms_between(t0, t2);
  return times;
}

}  // namespace

BenchCell bench_cell(std::size_t n, std::size_t d, double lambda, int reps,
                     std::uint64_t seed) {
  if (n == 0 || d == 0) throw InvalidConfig("bench needs n >= 1 and d >= 1");
  if (reps < 1) throw InvalidConfig("bench needs reps >= 1");

  Rng rng(Rng::derive(seed, (static_cast<std::uint64_t>(n) << 24) ^ d));
  Matrix x(n, d);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = rng.normal();

  BenchCell cell;
  cell.n = n;
  cell.d = d;
  cell.auto_is_dual = d > n;

  volatile double sink = 0.0;
  std::vector<double> gram[2], solve[2], total[2];
  for (int rep = 0; rep < reps; ++rep) {
    for (int path = 0; path < 2; ++path) {
      const StageTimes t = run_path(x, y, lambda, path == 1, &sink);
      gram[path].push_back(t.gram_ms);
      solve[path].push_back(t.solve_ms);
      total[path].push_back(t.total_ms);
    }
  }
  cell.primal = {median(gram[0]), median(solve[0]), median(total[0])};
  cell.dual = {median(gram[1]), median(solve[1]), median(total[1])};
  return cell;
}

}  // namespace ridgelayer
