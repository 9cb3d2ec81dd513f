#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "core/ridge.hpp"
#include "core/sampling.hpp"

namespace ridgelayer {

struct TrackerConfig {
  double lambda = Defaults::kLambda;
  double delta = Defaults::kUpdateRate;  // data-matrix blend rate, in [0, 1]
  RidgePath path = RidgePath::kAuto;
};

// Per-sequence state machine: train on the first frame, then per frame blend
// the data matrix as X_t = (1-delta) X_{t-1} + delta X~_t, re-solve, and
// localize at the argmax of Z w. Labels stay fixed because the grid is
// always centered on the current estimate.
class Tracker {
 public:
  Tracker(const Matrix& first_frame_features, const Vector& labels,
          Point initial_estimate, const TrackerConfig& cfg = {});

  // Blends the new frame into the running data matrix and re-solves.
  // delta = 0 keeps the matrix untouched; delta = 1 replaces it exactly.
  void update(const Matrix& new_features);

  struct Localization {
    std::size_t index = 0;
    double score = 0.0;
    Point center;
  };

  // yhat = Z w; the highest-scoring sample (lowest index on ties) becomes
  // the new estimate.
  Localization localize(const Matrix& search_features, const SampleGrid& grid);

  const Matrix& data_matrix() const { return x_accum_; }
  const Vector& labels() const { return labels_; }
  const Vector& weights() const { return w_; }
  Point estimate() const { return estimate_; }
  std::size_t frame_index() const { return frame_; }
  const TrackerConfig& config() const { return cfg_; }

  // Optional hook invoked after each localization, a seam for bolt-on box
  // refinement. No-op by default.
  using RefineHook = void (*)(Localization&, void* user);
  void set_refine_hook(RefineHook hook, void* user) {
    refine_hook_ = hook;
    refine_user_ = user;
  }

 private:
  void resolve();

  TrackerConfig cfg_;
  Matrix x_accum_;
  Vector labels_;
  Vector w_;
  Point estimate_;
  std::size_t frame_ = 1;
  RefineHook refine_hook_ = nullptr;
  void* refine_user_ = nullptr;
};

struct SyntheticTrackConfig {
  std::size_t frames = 100;
  std::size_t grid_side = Defaults::kGridSide;
  std::size_t dim = 32;
  double noise = 0.05;
  double drift = 0.3;  // true-target step per frame, in grid cells
  double target_w = 40.0;
  double target_h = 40.0;
  double region_scale = Defaults::kRegionScale;
  double sigma_factor = Defaults::kSigmaFactor;
  double lambda = Defaults::kLambda;
  double delta = Defaults::kUpdateRate;
  std::uint64_t seed = 1;
  Point start{200.0, 150.0};
};

struct FrameResult {
  std::size_t frame = 0;
  Point truth;   // filled only when ground truth is known
  Point estimate;
  double score = 0.0;
  double error = 0.0;  // |estimate - truth|, NaN when truth unknown
  bool has_truth = false;
};

struct TrackSummary {
  std::vector<FrameResult> frames;
  double mean_error = 0.0;  // over frames with truth
  double spacing = 0.0;     // grid cell size, the natural error unit
};

// Drifting-target sequence against a SyntheticWorld: per frame the search
// grid re-centers on the previous estimate, localization picks the estimate,
// and the training grid re-centers there before the blend update.
TrackSummary track_synthetic(const SyntheticTrackConfig& cfg);

struct FileTrackConfig {
  std::filesystem::path frames_dir;
  std::optional<std::filesystem::path> ground_truth;  // "cx cy" per line
  Point init_center;
  std::size_t grid_side = Defaults::kGridSide;  // frame rows must equal grid_side^2
  double region_size = 0.0;  // derived from target size when 0
  double target_w = 40.0;
  double target_h = 40.0;
  double region_scale = Defaults::kRegionScale;
  double sigma_factor = Defaults::kSigmaFactor;
  double lambda = Defaults::kLambda;
  double delta = Defaults::kUpdateRate;
};

// File-driven sequence; each frame's single matrix serves both localization
// and the update.
TrackSummary track_files(const FileTrackConfig& cfg);

// Tab-separated trajectory dump, one row per frame.
void write_trajectory(const TrackSummary& summary, const std::filesystem::path& path);

}  // namespace ridgelayer
