#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "core/loss.hpp"
#include "core/ridge.hpp"
#include "core/sampling.hpp"

namespace ridgelayer {

struct AdamConfig {
  double beta1 = Defaults::kAdamBeta1;
  double beta2 = Defaults::kAdamBeta2;
  double eps = Defaults::kAdamEps;
};

struct AdamState {
  Matrix m;  // first-moment estimate, same shape as the parameter
  Matrix v;  // second-moment estimate
  std::size_t step = 0;
};

// One bias-corrected step; grad must match param's shape.
void adam_update(Matrix& param, const Matrix& grad, AdamState& state, double lr,
                 const AdamConfig& cfg = {});

// The trainable piece: a linear map from raw features to the embedding the
// ridge layer consumes. Raw features stay frozen, mirroring a frozen
// backbone with a trainable head.
class LinearEmbedding {
 public:
  LinearEmbedding(std::size_t dim_in, std::size_t dim_out, std::uint64_t seed);

  const Matrix& weight() const { return weight_; }
  Matrix& weight() { return weight_; }
  AdamState& adam() { return adam_; }
  std::size_t dim_in() const { return weight_.rows(); }
  std::size_t dim_out() const { return weight_.cols(); }

 private:
  Matrix weight_;  // dim_in x dim_out
  AdamState adam_;
};

// One training/test image pair at the feature level.
struct TrainPair {
  Matrix x_raw;    // n x dim_in
  Vector y_train;  // n
  Matrix z_raw;    // n x dim_in
  Vector y_test;   // n
};

struct TrainConfig {
  std::size_t steps = 200;
  double lr = Defaults::kLearnRate;
  std::size_t batch_pairs = 1;
  LossKind loss = LossKind::kShrinkageModified;
  std::uint64_t seed = 1;
  std::size_t grid_side = Defaults::kGridSide;
  std::size_t dim_in = 16;
  std::size_t dim_out = 4;
  double noise = 0.05;
  double lambda = Defaults::kLambda;
  double sigma_factor = Defaults::kSigmaFactor;
  double target_w = 40.0;
  double target_h = 40.0;
  double region_scale = Defaults::kRegionScale;
  ShrinkageParams shrink{};
  std::size_t num_pairs = 8;          // training pairs generated for the task
  std::size_t checkpoint_every = 50;  // steps between RLT1 checkpoints, 0 = off
  double lr_decay_factor = 1.0;       // <1 enables constant decay-by-factor
  std::size_t lr_decay_every = 0;     // steps between decays, 0 = off
  double max_offset_cells = 4.0;      // test-image target displacement bound
  AdamConfig adam{};
};

// A seeded task: pairs of (training grid centered on the target, test grid
// with the target displaced), raw features from one SyntheticWorld, plus a
// held-out validation pair. Gaussian labels make most samples easy
// negatives, so the class balance is naturally skewed.
struct TrainTask {
  std::vector<TrainPair> pairs;
  TrainPair validation;
};

TrainTask make_synthetic_task(const TrainConfig& cfg);

// Loss and embedding gradient for one pair, the full chain
// raw -> embedding -> ridge solve -> predict -> loss. Pure; no state change.
Matrix train_gradient(const LinearEmbedding& emb, const TrainPair& pair,
                      const TrainConfig& cfg, double* loss_out);

struct StepResult {
  double loss = 0.0;
  double grad_norm = 0.0;  // max-norm of the embedding gradient
};

// Averages gradients over the step's batch and applies one optimizer step.
StepResult train_step(LinearEmbedding& emb, const TrainTask& task,
                      std::size_t step_index, const TrainConfig& cfg);

// Root-mean-square prediction error on validation samples whose label is at
// least fg_threshold; the near-zero background would otherwise drown the
// signal the tracker actually uses.
double validation_error(const LinearEmbedding& emb, const TrainPair& validation,
                        const TrainConfig& cfg, double fg_threshold = 0.1);

struct TrainSummary {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t steps = 0;
};

// Full run: metrics.tsv (step, loss, grad_norm) plus periodic RLT1 embedding
// checkpoints under out_dir. Wall-clock timing goes to `console` as
// "# wall ..." lines so the metrics file stays deterministic per seed.
TrainSummary train_run(const TrainConfig& cfg, const std::filesystem::path& out_dir,
                       std::ostream* console);

struct LossCurve {
  LossKind kind;
  std::vector<double> train_loss;  // per step
  std::vector<double> val_error;   // per step
  std::size_t steps_to_threshold = 0;  // steps+1 when never reached
};

struct CompareSummary {
  std::vector<LossCurve> curves;  // mse, origin, modified
  double threshold = 0.0;
  bool modified_not_slower_than_mse = false;
};

// Trains one identically-seeded embedding per loss on the same task and
// writes aligned curves.tsv plus report.txt under out_dir.
CompareSummary compare_losses_run(const TrainConfig& cfg, double val_threshold,
                                  const std::filesystem::path& out_dir,
                                  std::ostream* console);

}  // namespace ridgelayer
