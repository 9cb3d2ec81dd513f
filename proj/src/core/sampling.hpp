#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "core/defaults.hpp"
#include "core/tensor.hpp"

namespace ridgelayer {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct LabelConfig {
  double sigma_factor = Defaults::kSigmaFactor;  // bandwidth / sqrt(tw*th)
};

// Square lattice of grid_side^2 target-sized sample windows covering a
// region. grid_side must be odd so the central sample sits exactly on the
// region center.
class SampleGrid {
 public:
  SampleGrid(Point region_center, double region_size, double target_w,
             double target_h, std::size_t grid_side);

  std::size_t grid_side() const { return grid_side_; }
  std::size_t count() const { return centers_.size(); }
  double spacing() const { return spacing_; }  // 0 for a single-sample grid
  Point region_center() const { return region_center_; }
  double region_size() const { return region_size_; }
  double target_w() const { return target_w_; }
  double target_h() const { return target_h_; }
  Point center(std::size_t index) const { return centers_[index]; }
  const std::vector<Point>& centers() const { return centers_; }
  std::size_t central_index() const { return centers_.size() / 2; }

  // Same lattice shifted to a new region center.
  SampleGrid recentered(Point new_center) const;

 private:
  Point region_center_;
  double region_size_;
  double target_w_;
  double target_h_;
  std::size_t grid_side_;
  double spacing_;
  std::vector<Point> centers_;  // row-major over (row, col)
};

SampleGrid make_grid(Point region_center, double region_size, double target_w,
                     double target_h, std::size_t grid_side);

// Labels exp(-d^2 / (2 sigma^2)) with d the distance from each sample center
// to the target and sigma = sigma_factor * sqrt(target_w * target_h). Values
// lie in (0, 1] and hit 1 exactly where a sample center meets the target.
// Distances are plain Euclidean on the lattice; the samples here are real,
// not circulant, so no cyclic wrap-around applies.
Vector gaussian_labels(const SampleGrid& grid, Point target_center,
                       const LabelConfig& cfg = {});

// Produces one feature row per sample center.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual Matrix features(const SampleGrid& grid) = 0;
};

// Synthetic appearance model: each sample's feature row is a fixed seeded
// random projection of a smooth radial encoding of its displacement from the
// true target, so a ridge regressor on these rows can fit Gaussian labels.
class SyntheticWorld {
 public:
  static constexpr std::size_t kEncodingChannels = 8;

  SyntheticWorld(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  Matrix features(const SampleGrid& grid, Point true_target, double noise,
                  std::uint64_t noise_stream) const;

 private:
  std::size_t dim_;
  Matrix projection_;  // kEncodingChannels x dim
};

// One-shot convenience over SyntheticWorld; deterministic per seed.
Matrix synthetic_features(const SampleGrid& grid, Point target_center,
                          std::size_t dim, double noise, std::uint64_t seed);

// FeatureProvider over a SyntheticWorld. The caller moves the target between
// frames; every features() call consumes a fresh noise stream.
class SyntheticFeatureProvider : public FeatureProvider {
 public:
  SyntheticFeatureProvider(std::size_t dim, double noise, std::uint64_t seed);

  void set_target(Point p) { target_ = p; }
  std::size_t dim() const override { return world_.dim(); }
  Matrix features(const SampleGrid& grid) override;

 private:
  SyntheticWorld world_;
  Point target_;
  double noise_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

// Streams per-frame feature matrices from RLT1 files in a directory, sorted
// by filename.
class FileFeatureProvider : public FeatureProvider {
 public:
  explicit FileFeatureProvider(const std::filesystem::path& dir);

  std::size_t dim() const override { return dim_; }
  std::size_t frame_count() const { return files_.size(); }
  bool exhausted() const { return next_ >= files_.size(); }
  Matrix features(const SampleGrid& grid) override;

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t next_ = 0;
  std::size_t dim_ = 0;
};

}  // namespace ridgelayer
