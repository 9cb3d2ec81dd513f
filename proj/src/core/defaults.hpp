#pragma once

#include <cstddef>

namespace ridgelayer {

// One place for every tunable's default so the CLI, the C API and the tests
// all agree on the out-of-the-box configuration.
struct Defaults {
  static constexpr double kLambda = 0.1;        // ridge regularization
  static constexpr double kShrinkA = 10.0;      // shrinkage speed
  static constexpr double kShrinkC = 0.2;       // shrinkage localization
  static constexpr double kUpdateRate = 0.01;   // tracker data-matrix blend
  static constexpr double kLearnRate = 0.005;   // optimizer step size
  static constexpr double kSigmaFactor = 0.1;   // label bandwidth / target size
  static constexpr std::size_t kGridSide = 31;  // 961 samples per region
  static constexpr double kRegionScale = 5.0;   // region side / target side
  static constexpr double kAdamBeta1 = 0.9;
  static constexpr double kAdamBeta2 = 0.999;
  static constexpr double kAdamEps = 1e-8;
};

}  // namespace ridgelayer
