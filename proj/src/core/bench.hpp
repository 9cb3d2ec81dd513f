#pragma once

#include <cstdint>

#include "core/ridge.hpp"

namespace ridgelayer {

// Median stage timings in milliseconds. The gram stage forms the normal
// system (XT X or X XT plus the right-hand side); the solve stage adds
// lambda, factors, substitutes and, on the dual path, maps back through XT.
// The factor+substitute stage is the piece whose cost is cubic in the system
// side, which is what the primal/dual switch trades on.
struct StageTimes {
  double gram_ms = 0.0;
  double solve_ms = 0.0;
  double total_ms = 0.0;
};

struct BenchCell {
  std::size_t n = 0;
  std::size_t d = 0;
  StageTimes primal;
  StageTimes dual;
  bool auto_is_dual = false;  // what RidgePath::kAuto picks at this size
};

// Times both paths on one random n x d problem, median over reps.
BenchCell bench_cell(std::size_t n, std::size_t d, double lambda, int reps,
                     std::uint64_t seed);

}  // namespace ridgelayer
