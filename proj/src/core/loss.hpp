#pragma once

#include "core/defaults.hpp"
#include "core/tensor.hpp"

namespace ridgelayer {

enum class Reduction { kMean, kSum };

struct ShrinkageParams {
  double a = Defaults::kShrinkA;  // shrinkage speed
  double c = Defaults::kShrinkC;  // localization
  Reduction reduction = Reduction::kMean;
};

struct LossResult {
  double loss = 0.0;
  Vector d_pred;  // dloss/dpred
};

// Squared error modulated per element by exp(y) / (1 + exp(a (c - |r|))),
// r = pred - y. The sigmoid weight suppresses easy (small-residual) samples;
// the |r| subgradient at r = 0 is taken as 0.
LossResult shrinkage_modified(const Vector& pred, const Vector& y,
                              const ShrinkageParams& p = {});

// Same shape but with the signed residual in the exponent, exp(a (c - r)):
// samples that overshoot their label are treated as easy.
LossResult shrinkage_origin(const Vector& pred, const Vector& y,
                            const ShrinkageParams& p = {});

LossResult mse(const Vector& pred, const Vector& y,
               Reduction reduction = Reduction::kMean);

enum class LossKind { kShrinkageModified, kShrinkageOrigin, kMse };

LossResult evaluate_loss(LossKind kind, const Vector& pred, const Vector& y,
                         const ShrinkageParams& p = {});

const char* loss_kind_name(LossKind kind);

// Overflow-safe 1 / (1 + exp(-z)).
double sigmoid(double z);

}  // namespace ridgelayer
