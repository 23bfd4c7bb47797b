#pragma once

// Deterministic synthetic lane scenes: ground-truth curves, perturbed
// predictions and clusterable embedding fields.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lanekit/geometry.hpp"
#include "lanekit/losses.hpp"

namespace lanekit {

struct SceneSpec {
  ImageGrid grid{1640, 590};
  int lane_count = 4;
  /// Shared horizontal bend at the top of the image, as a fraction of the width.
  double curvature = 0.1;
  /// Standard deviation of the per-point x noise on predictions (pixels).
  double jitter = 0.0;
  std::uint64_t seed = 0;
  std::size_t embedding_dim = 4;
  double delta_v = 0.5;
  double delta_d = 3.1;
  /// Stroke width used for the instance map and embedding field.
  double lane_width = 30.0;
  /// Points per lane, evenly spaced over the image height.
  int samples = 30;
  double drop_probability = 0.1;
  double add_probability = 0.1;
};

struct LaneScene {
  std::vector<LanePolyline> gt;
  std::vector<LanePolyline> pred;
  /// Row coordinates shared by every GT lane point.
  std::vector<double> h_samples;
  /// Index of the GT lane missing from pred, or -1.
  int dropped_lane = -1;
  bool spurious_added = false;
};

struct Scene {
  LaneScene lanes;
  BinaryMask mask;
  InstanceMap instances;
  EmbeddingField field;
  /// Cluster centers used for the field, lane-major.
  ClusterMeans means;
};

/// Throws InvalidArgument for an invalid or infeasible spec (lanes that would
/// touch, leave the image or break the margin rule).
void validate_scene_spec(const SceneSpec& spec);

/// Geometry only; cheap enough for large corpora.
LaneScene generate_lanes(const SceneSpec& spec);

/// Geometry plus rasterized instances and an embedding field in which every
/// lane pixel lies within delta_v / 2 of its lane mean and means are at
/// least delta_d + 1 apart.
Scene generate_scene(const SceneSpec& spec);

}  // namespace lanekit
