#include "core/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/rng.hpp"
#include "core/tensor_io.hpp"

namespace ridgelayer {

SampleGrid::SampleGrid(Point region_center, double region_size, double target_w,
                       double target_h, std::size_t grid_side)
    : region_center_(region_center), region_size_(region_size),
      target_w_(target_w), target_h_(target_h), grid_side_(grid_side) {
  if (grid_side < 1 || grid_side % 2 == 0)
    throw InvalidConfig("grid_side must be odd and >= 1 so a central sample exists, got " +
                        std::to_string(grid_side));
  if (!(region_size > 0.0))
    throw InvalidConfig("region_size must be positive");
  if (!(target_w > 0.0) || !(target_h > 0.0))
    throw InvalidConfig("target size must be positive");

  spacing_ = grid_side == 1 ? 0.0 : region_size / static_cast<double>(grid_side - 1);
  const auto half = static_cast<std::ptrdiff_t>(grid_side / 2);
  centers_.reserve(grid_side * grid_side);
  // Offsets are (index - half) * spacing so the lattice is exactly symmetric
  // and the middle sample coincides with the region center bit-for-bit.
  for (std::ptrdiff_t row = 0; row < static_cast<std::ptrdiff_t>(grid_side); ++row)
    for (std::ptrdiff_t col = 0; col < static_cast<std::ptrdiff_t>(grid_side); ++col)
      centers_.push_back({region_center.x + static_cast<double>(col - half) * spacing_,
                          region_center.y + static_cast<double>(row - half) * spacing_});
}

SampleGrid SampleGrid::recentered(Point new_center) const {
  return SampleGrid(new_center, region_size_, target_w_, target_h_, grid_side_);
}

SampleGrid make_grid(Point region_center, double region_size, double target_w,
                     double target_h, std::size_t grid_side) {
  return SampleGrid(region_center, region_size, target_w, target_h, grid_side);
}

Vector gaussian_labels(const SampleGrid& grid, Point target_center,
                       const LabelConfig& cfg) {
  if (!(cfg.sigma_factor > 0.0))
    throw InvalidConfig("sigma_factor must be positive");
  const double sigma = cfg.sigma_factor * std::sqrt(grid.target_w() * grid.target_h());
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Vector labels(grid.count());
  for (std::size_t i = 0; i < grid.count(); ++i) {
    const Point c = grid.center(i);
    const double dx = c.x - target_center.x;
    const double dy = c.y - target_center.y;
    labels[i] = std::exp(-(dx * dx + dy * dy) * inv);
  }
  return labels;
}

namespace {

// Radial scales of the encoding in units of sqrt(target area); the default
// label bandwidth (sigma_factor 0.1) is representable exactly.
constexpr double kEncodingScales[4] = {0.05, 0.1, 0.2, 0.4};
constexpr double kDirectionalScale = 0.3;
constexpr double kEncodingGain = 4.0;  // keeps ridge shrinkage at lambda=0.1 negligible

void encode_displacement(double u, double v, double* out) {
  const double r2 = u * u + v * v;
  for (int k = 0; k < 4; ++k) {
    const double s = kEncodingScales[k];
    out[k] = kEncodingGain * std::exp(-r2 / (2.0 * s * s));
  }
  const double dir = std::exp(-r2 / (2.0 * kDirectionalScale * kDirectionalScale));
  out[4] = kEncodingGain * u * dir;
  out[5] = kEncodingGain * v * dir;
  out[6] = kEncodingGain * std::exp(-r2 / 2.0);
  out[7] = kEncodingGain;
}

}  // namespace

SyntheticWorld::SyntheticWorld(std::size_t dim, std::uint64_t seed) : dim_(dim) {
  if (dim < 2) throw InvalidConfig("synthetic features need dim >= 2");
  Rng rng(Rng::derive(seed, 0x70726f6aULL));
  projection_ = Matrix(kEncodingChannels, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(kEncodingChannels));
  for (std::size_t k = 0; k < kEncodingChannels; ++k)
    for (std::size_t j = 0; j < dim; ++j) projection_(k, j) = scale * rng.normal();
}

Matrix SyntheticWorld::features(const SampleGrid& grid, Point true_target,
                                double noise, std::uint64_t noise_stream) const {
  const double unit = std::sqrt(grid.target_w() * grid.target_h());
  Matrix f(grid.count(), dim_);
  Rng noise_rng(Rng::derive(noise_stream, 0x6e6f6973ULL));
  double enc[kEncodingChannels];
  for (std::size_t i = 0; i < grid.count(); ++i) {
    const Point c = grid.center(i);
    encode_displacement((c.x - true_target.x) / unit, (c.y - true_target.y) / unit, enc);
    double* row = f.row(i);
    for (std::size_t k = 0; k < kEncodingChannels; ++k) {
      const double ek = enc[k];
      const double* prow = projection_.row(k);
      for (std::size_t j = 0; j < dim_; ++j) row[j] += ek * prow[j];
    }
    if (noise > 0.0)
      for (std::size_t j = 0; j < dim_; ++j) row[j] += noise * noise_rng.normal();
  }
  return f;
}

Matrix synthetic_features(const SampleGrid& grid, Point target_center,
                          std::size_t dim, double noise, std::uint64_t seed) {
  const SyntheticWorld world(dim, seed);
  return world.features(grid, target_center, noise, Rng::derive(seed, 1));
}

SyntheticFeatureProvider::SyntheticFeatureProvider(std::size_t dim, double noise,
                                                   std::uint64_t seed)
    : world_(dim, seed), noise_(noise), seed_(seed) {}

Matrix SyntheticFeatureProvider::features(const SampleGrid& grid) {
  ++calls_;
  return world_.features(grid, target_, noise_, Rng::derive(seed_, 0x1000 + calls_));
}

FileFeatureProvider::FileFeatureProvider(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("feature directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".rlt")
      files_.push_back(entry.path());
  std::sort(files_.begin(), files_.end());
  if (files_.empty())
    throw IoError("no .rlt feature files in " + dir.string());
  dim_ = read_matrix(files_.front()).cols();
}

Matrix FileFeatureProvider::features(const SampleGrid& grid) {
  if (exhausted())
    throw ContractViolation("feature stream exhausted after " +
                            std::to_string(files_.size()) + " frames");
  Matrix m = read_matrix(files_[next_]);
  if (m.rows() != grid.count() || m.cols() != dim_)
    throw ContractViolation("frame " + files_[next_].filename().string() + " is " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(grid.count()) + "x" +
                            std::to_string(dim_));
  ++next_;
  return m;
}

}  // namespace ridgelayer
