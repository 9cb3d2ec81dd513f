#include "core/tracker.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "core/rng.hpp"

namespace ridgelayer {

Tracker::Tracker(const Matrix& first_frame_features, const Vector& labels,
                 Point initial_estimate, const TrackerConfig& cfg)
    : cfg_(cfg), x_accum_(first_frame_features), labels_(labels),
      estimate_(initial_estimate) {
  if (!(cfg.delta >= 0.0 && cfg.delta <= 1.0))
    throw InvalidConfig("tracker delta must lie in [0, 1]");
  if (labels_.size() != x_accum_.rows())
    throw ContractViolation("tracker: label count " + std::to_string(labels_.size()) +
                            " does not match sample count " +
                            std::to_string(x_accum_.rows()));
  resolve();
}

void Tracker::resolve() {
  w_ = ridge_forward(x_accum_, labels_, {cfg_.lambda, cfg_.path}).weights();
}

void Tracker::update(const Matrix& new_features) {
  if (!new_features.same_shape(x_accum_))
    throw ContractViolation("tracker update: frame shape " +
                            std::to_string(new_features.rows()) + "x" +
                            std::to_string(new_features.cols()) + " does not match " +
                            std::to_string(x_accum_.rows()) + "x" +
                            std::to_string(x_accum_.cols()));
  ++frame_;
  const double delta = cfg_.delta;
  if (delta == 1.0) {
    x_accum_ = new_features;
  } else if (delta != 0.0) {
    // Increment form of (1-d) X + d X~: identical frames are an exact fixed
    // point of the blend.
    double* acc = x_accum_.data();
    const double* fresh = new_features.data();
    for (std::size_t i = 0; i < x_accum_.size(); ++i)
      acc[i] += delta * (fresh[i] - acc[i]);
  }
  resolve();
}

Tracker::Localization Tracker::localize(const Matrix& search_features,
                                        const SampleGrid& grid) {
  if (search_features.rows() != grid.count())
    throw ContractViolation("localize: feature rows " +
                            std::to_string(search_features.rows()) +
                            " do not match grid samples " + std::to_string(grid.count()));
  const Vector scores = predict(search_features, w_);
  Localization loc;
  loc.index = argmax_first(scores.span());
  loc.score = scores[loc.index];
  loc.center = grid.center(loc.index);
  if (refine_hook_ != nullptr) refine_hook_(loc, refine_user_);
  estimate_ = loc.center;
  return loc;
}

namespace {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void finish_summary(TrackSummary& summary) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& fr : summary.frames)
    if (fr.has_truth) {
      total += fr.error;
      ++counted;
    }
  summary.mean_error = counted > 0 ? total / static_cast<double>(counted) : 0.0;
}

std::vector<Point> read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth: " + path.string());
  std::vector<Point> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    Point p;
    if (!(fields >> p.x >> p.y))
      throw IoError("malformed ground-truth line " +
                    std::to_string(points.size() + 1) + " in " + path.string());
    points.push_back(p);
  }
  return points;
}

}  // namespace

TrackSummary track_synthetic(const SyntheticTrackConfig& cfg) {
  if (cfg.frames == 0) throw InvalidConfig("synthetic track needs at least one frame");
  const double region_size =
      cfg.region_scale * std::sqrt(cfg.target_w * cfg.target_h);
  const SampleGrid base({cfg.start.x, cfg.start.y}, region_size, cfg.target_w,
                        cfg.target_h, cfg.grid_side);
  const SyntheticWorld world(cfg.dim, cfg.seed);
  const double step = cfg.drift * base.spacing();

  Point truth = cfg.start;
  const Matrix first =
      world.features(base, truth, cfg.noise, Rng::derive(cfg.seed, 1u << 20));
  const Vector labels = gaussian_labels(base, base.region_center(), {cfg.sigma_factor});
  Tracker tracker(first, labels, truth, {cfg.lambda, cfg.delta});

  TrackSummary summary;
  summary.spacing = base.spacing();
  const double init_score =
      predict(first, tracker.weights())[base.central_index()];
  summary.frames.push_back({0, truth, truth, init_score, 0.0, true});

  Rng drift_rng(Rng::derive(cfg.seed, 0xd21f7ULL));
  double heading = 2.0 * 3.14159265358979323846 * drift_rng.uniform();
  for (std::size_t t = 1; t < cfg.frames; ++t) {
    heading += 0.35 * drift_rng.normal();
    truth.x += step * std::cos(heading);
    truth.y += step * std::sin(heading);

    const SampleGrid search = base.recentered(tracker.estimate());
    const Matrix z = world.features(search, truth, cfg.noise,
                                    Rng::derive(cfg.seed, (2u << 20) + t));
    const auto loc = tracker.localize(z, search);

    const SampleGrid train_grid = base.recentered(loc.center);
    const Matrix fresh = world.features(train_grid, truth, cfg.noise,
                                        Rng::derive(cfg.seed, (3u << 20) + t));
    tracker.update(fresh);

    summary.frames.push_back(
        {t, truth, loc.center, loc.score, distance(truth, loc.center), true});
  }
  finish_summary(summary);
  return summary;
}

TrackSummary track_files(const FileTrackConfig& cfg) {
  FileFeatureProvider provider(cfg.frames_dir);
  std::vector<Point> truth;
  if (cfg.ground_truth) truth = read_ground_truth(*cfg.ground_truth);

  const double region_size =
      cfg.region_size > 0.0 ? cfg.region_size
                            : cfg.region_scale * std::sqrt(cfg.target_w * cfg.target_h);
  const SampleGrid base(cfg.init_center, region_size, cfg.target_w, cfg.target_h,
                        cfg.grid_side);
  const Vector labels = gaussian_labels(base, base.region_center(), {cfg.sigma_factor});

  const Matrix first = provider.features(base);
  Tracker tracker(first, labels, cfg.init_center, {cfg.lambda, cfg.delta});

  TrackSummary summary;
  summary.spacing = base.spacing();
  auto record = [&](std::size_t t, Point est, double score) {
    FrameResult fr;
    fr.frame = t;
    fr.estimate = est;
    fr.score = score;
    if (t < truth.size()) {
      fr.truth = truth[t];
      fr.has_truth = true;
      fr.error = distance(est, truth[t]);
    } else {
      fr.error = std::numeric_limits<double>::quiet_NaN();
    }
    summary.frames.push_back(fr);
  };
  record(0, cfg.init_center, predict(first, tracker.weights())[base.central_index()]);

  // One matrix per frame: it drives the localization and then becomes the
  // update sample.
  for (std::size_t t = 1; !provider.exhausted(); ++t) {
    const SampleGrid search = base.recentered(tracker.estimate());
    const Matrix z = provider.features(search);
    const auto loc = tracker.localize(z, search);
    tracker.update(z);
    record(t, loc.center, loc.score);
  }
  finish_summary(summary);
  return summary;
}

void write_trajectory(const TrackSummary& summary, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "frame\ttruth_x\ttruth_y\test_x\test_y\tscore\terror\n";
  char buf[256];
  for (const auto& fr : summary.frames) {
    if (fr.has_truth)
      std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n",
                    fr.frame, fr.truth.x, fr.truth.y, fr.estimate.x, fr.estimate.y,
                    fr.score, fr.error);
    else
      std::snprintf(buf, sizeof buf, "%zu\t-\t-\t%.17g\t%.17g\t%.17g\t-\n", fr.frame,
                    fr.estimate.x, fr.estimate.y, fr.score);
    out << buf;
  }
  if (!out) throw IoError("short write: " + path.string());
}

}  // namespace ridgelayer
