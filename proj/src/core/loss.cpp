#include "core/loss.hpp"

#include <cmath>
#include <string>

namespace ridgelayer {

namespace {

void check_pair(const Vector& pred, const Vector& y) {
  if (pred.size() != y.size())
    throw ContractViolation("loss: prediction length " + std::to_string(pred.size()) +
                            " does not match label length " + std::to_string(y.size()));
}

void check_params(const ShrinkageParams& p) {
  if (!(p.a > 0.0) || !(p.c > 0.0))
    throw InvalidConfig("shrinkage loss: a and c must be positive");
}

double reduction_scale(Reduction r, std::size_t count) {
  return r == Reduction::kMean && count > 0 ? 1.0 / static_cast<double>(count) : 1.0;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LossResult shrinkage_modified(const Vector& pred, const Vector& y,
                              const ShrinkageParams& p) {
  check_pair(pred, y);
  check_params(p);
  const std::size_t m = pred.size();
  const double scale = reduction_scale(p.reduction, m);
  LossResult out{0.0, Vector(m)};
  for (std::size_t i = 0; i < m; ++i) {
    const double r = pred[i] - y[i];
    const double ar = std::abs(r);
    const double ey = std::exp(y[i]);
    // weight = 1 / (1 + exp(a (c - |r|))) = sigmoid(a (|r| - c))
    const double w = sigmoid(p.a * (ar - p.c));
    out.loss += scale * ey * r * r * w;
    // d/dr [r^2 w] = r (2 w + a |r| w (1 - w)); zero at r = 0 by the chosen
    // subgradient, which the formula already satisfies.
    out.d_pred[i] = scale * ey * r * (2.0 * w + p.a * ar * w * (1.0 - w));
  }
  return out;
}

LossResult shrinkage_origin(const Vector& pred, const Vector& y,
                            const ShrinkageParams& p) {
  check_pair(pred, y);
  check_params(p);
  const std::size_t m = pred.size();
  const double scale = reduction_scale(p.reduction, m);
  LossResult out{0.0, Vector(m)};
  for (std::size_t i = 0; i < m; ++i) {
    const double r = pred[i] - y[i];
    const double ey = std::exp(y[i]);
    const double w = sigmoid(p.a * (r - p.c));
    out.loss += scale * ey * r * r * w;
    out.d_pred[i] = scale * ey * r * (2.0 * w + p.a * r * w * (1.0 - w));
  }
  return out;
}

LossResult mse(const Vector& pred, const Vector& y, Reduction reduction) {
  check_pair(pred, y);
  const std::size_t m = pred.size();
  const double scale = reduction_scale(reduction, m);
  LossResult out{0.0, Vector(m)};
  for (std::size_t i = 0; i < m; ++i) {
    const double r = pred[i] - y[i];
    out.loss += scale * r * r;
    out.d_pred[i] = scale * 2.0 * r;
  }
  return out;
}

LossResult evaluate_loss(LossKind kind, const Vector& pred, const Vector& y,
                         const ShrinkageParams& p) {
  switch (kind) {
    case LossKind::kShrinkageModified:
      return shrinkage_modified(pred, y, p);
    case LossKind::kShrinkageOrigin:
      return shrinkage_origin(pred, y, p);
    case LossKind::kMse:
      return mse(pred, y, p.reduction);
  }
  throw InvalidConfig("unknown loss kind");
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kShrinkageModified:
      return "modified";
    case LossKind::kShrinkageOrigin:
      return "origin";
    case LossKind::kMse:
      return "mse";
  }
  return "?";
}

}  // namespace ridgelayer
