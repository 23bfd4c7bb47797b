#include "lanekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace lanekit {

namespace {

constexpr double kTopScale = 0.4;      // lanes converge toward the top of the image
constexpr double kOffsetJitter = 0.1;  // per-lane offset noise, in lane spacings

double spacing_of(const SceneSpec& spec) {
  return static_cast<double>(spec.grid.width()) / static_cast<double>(spec.lane_count + 1);
}

double lane_x(double offset, double bend, double t, double half_width) {
  return half_width + offset * (kTopScale + (1.0 - kTopScale) * t) + bend * (1.0 - t) * (1.0 - t);
}

}  // namespace

void validate_scene_spec(const SceneSpec& spec) {
  if (spec.lane_count < 1 || spec.lane_count > 8) throw InvalidArgument("lane_count must be in 1..8");
  if (!(spec.jitter >= 0.0)) throw InvalidArgument("jitter must be non-negative");
  if (spec.embedding_dim < 1) throw InvalidArgument("embedding_dim must be >= 1");
  if (!(spec.lane_width > 0.0)) throw InvalidArgument("lane_width must be positive");
  if (spec.samples < 2) throw InvalidArgument("samples must be >= 2");
  if (spec.grid.height() < 2) throw InvalidArgument("grid height must be >= 2");
  if (!(spec.drop_probability >= 0.0 && spec.drop_probability <= 1.0) ||
      !(spec.add_probability >= 0.0 && spec.add_probability <= 1.0)) {
    throw InvalidArgument("probabilities must be in [0, 1]");
  }
  // Also validates the margins themselves.
  (void)LossParams(spec.delta_v, spec.delta_d);

  const double spacing = spacing_of(spec);
  const double worst_gap = kTopScale * spacing * (1.0 - 2.0 * kOffsetJitter);
  if (spec.lane_count > 1 && !(worst_gap > spec.lane_width + 1.0)) {
    throw InvalidArgument("infeasible scene: lanes cannot fit without touching");
  }
  const double half = static_cast<double>(spec.grid.width()) / 2.0;
  const double max_offset = half - spacing + kOffsetJitter * spacing;
  const double bend = spec.curvature * spec.grid.width();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  // x is linear in the offset, so the outermost lanes bound every lane.
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    for (double offset : {-max_offset, max_offset}) {
      const double x = lane_x(offset, bend, t, half);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (lo < 0.0 || hi > spec.grid.width() - 1.0) {
    throw InvalidArgument("infeasible scene: lanes leave the image");
  }
}

LaneScene generate_lanes(const SceneSpec& spec) {
  validate_scene_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double width = spec.grid.width();
  const double half = width / 2.0;
  const double last_row = spec.grid.height() - 1.0;
  const double spacing = spacing_of(spec);
  const double bend = spec.curvature * width;

  LaneScene scene;
  for (int i = 0; i < spec.samples; ++i) {
    const double y = std::round(i * last_row / (spec.samples - 1));
    if (scene.h_samples.empty() || y > scene.h_samples.back()) scene.h_samples.push_back(y);
  }

  for (int k = 0; k < spec.lane_count; ++k) {
    const double offset = (k + 1) * spacing - half + (2.0 * unit(rng) - 1.0) * kOffsetJitter * spacing;
    LanePolyline lane;
    for (double y : scene.h_samples) lane.points.push_back({lane_x(offset, bend, y / last_row, half), y});
    scene.gt.push_back(std::move(lane));
  }

  const double u_drop = unit(rng);
  const double u_add = unit(rng);
  const auto drop_pick = static_cast<int>(unit(rng) * spec.lane_count);
  if (u_drop < spec.drop_probability) scene.dropped_lane = std::min(drop_pick, spec.lane_count - 1);

  std::normal_distribution<double> noise(0.0, 1.0);
  for (int k = 0; k < spec.lane_count; ++k) {
    if (k == scene.dropped_lane) continue;
    LanePolyline lane = scene.gt[static_cast<std::size_t>(k)];
    if (spec.jitter > 0.0) {
      for (Point2& p : lane.points) p.x = std::clamp(p.x + spec.jitter * noise(rng), 0.0, width - 1.0);
    }
    scene.pred.push_back(std::move(lane));
  }

  if (u_add < spec.add_probability) {
    const double x_bottom = unit(rng) * (width - 1.0);
    const double x_top = unit(rng) * (width - 1.0);
    LanePolyline lane;
    for (double y : scene.h_samples) {
      const double t = y / last_row;
      lane.points.push_back({x_top + (x_bottom - x_top) * t, y});
    }
    scene.pred.push_back(std::move(lane));
    scene.spurious_added = true;
  }
  return scene;
}

Scene generate_scene(const SceneSpec& spec) {
  LaneScene lanes = generate_lanes(spec);
  LaneTargets targets = targets_from_lanes(lanes.gt, spec.lane_width, spec.grid);

  // Separate stream so the geometry stays identical to generate_lanes.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t dim = spec.embedding_dim;
  const auto lanes_n = static_cast<std::size_t>(spec.lane_count);
  const double min_gap = spec.delta_d + 1.0;
  ClusterMeans means{dim, std::vector<double>(lanes_n * dim, 0.0)};
  const double box = min_gap * static_cast<double>(lanes_n) * 2.0;
  const auto far_enough = [&](std::size_t c) {
    for (std::size_t o = 0; o < c; ++o) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = means.values[c * dim + k] - means.values[o * dim + k];
        d2 += d * d;
      }
      if (std::sqrt(d2) < min_gap) return false;
    }
    return true;
  };
  bool placed_all = true;
  for (std::size_t c = 0; c < lanes_n && placed_all; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      for (std::size_t k = 0; k < dim; ++k) means.values[c * dim + k] = unit(rng) * box;
      placed = far_enough(c);
    }
    placed_all = placed;
  }
  if (!placed_all) {
    // Collinear fallback along the first axis.
    for (std::size_t c = 0; c < lanes_n; ++c) {
      for (std::size_t k = 0; k < dim; ++k) means.values[c * dim + k] = k == 0 ? c * min_gap * 1.5 : 0.0;
    }
  }

  EmbeddingField field(spec.grid, dim, 0.0);
  const double ball = spec.delta_v / 2.0;
  std::vector<double> dir(dim);
  const auto labels = targets.instances.values();
  for (std::size_t pixel = 0; pixel < labels.size(); ++pixel) {
    if (labels[pixel] == 0) continue;
    double norm = 0.0;
    for (double& d : dir) {
      d = normal(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    const double radius = 0.999 * ball * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
    const auto mu = means.mean(labels[pixel] - 1);
    auto x = field.at(pixel);
    for (std::size_t k = 0; k < dim; ++k) x[k] = mu[k] + (norm > 0.0 ? radius * dir[k] / norm : 0.0);
  }

  for (std::size_t c = 0; c < lanes_n; ++c) {
    if (!far_enough(c)) throw Error("generated cluster means violate the separation precondition");
  }
  return Scene{std::move(lanes), std::move(targets.mask), std::move(targets.instances), std::move(field),
               std::move(means)};
}

}  // namespace lanekit
