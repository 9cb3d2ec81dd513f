#pragma once

#include <cstdint>

#include "core/loss.hpp"
#include "core/ridge.hpp"

namespace ridgelayer {

struct GradCheckReport {
  double max_rel_ridge = 0.0;    // solver backward vs central differences
  double max_rel_end2end = 0.0;  // embedding chain vs central differences
  bool pass(double threshold = 1e-4) const {
    return max_rel_ridge <= threshold && max_rel_end2end <= threshold;
  }
};

// Symmetric relative error with an absolute floor tied to the gradient's
// scale, so near-zero entries compare on an absolute basis.
double gradient_rel_error(double reference, double value, double scale);

// Checks ridge_backward on both solver paths against central finite
// differences, then the full chain raw -> embedding -> solve -> predict ->
// loss for the requested loss. Deterministic per seed.
GradCheckReport gradcheck_run(std::size_t n, std::size_t d, LossKind kind,
                              std::uint64_t seed, double lambda = Defaults::kLambda);

}  // namespace ridgelayer
