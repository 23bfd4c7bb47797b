#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "lanekit/geometry.hpp"
#include "lanekit/losses.hpp"

namespace lanekit {

struct ClusterConfig {
  /// Euclidean embedding radius; a pixel joins the current instance when its
  /// distance to the seed pixel is strictly smaller.
  double radius = 1.0;
  std::uint64_t seed = 0;
  /// Seed pixels in row-major order instead of at random.
  bool deterministic = false;
  /// Instances smaller than this are dropped back to background. 0 keeps all.
  std::size_t min_pixels = 0;

  /// radius = 2 delta_v.
  static ClusterConfig from_margins(const LossParams& params);
};

struct ClusteringResult {
  InstanceMap instances;
  std::uint32_t lane_count = 0;
};

/// Seeds an unassigned lane pixel, gives it and every unassigned lane pixel
/// within `radius` of it a fresh id, and repeats until no lane pixel is left.
ClusteringResult threshold_cluster(const EmbeddingField& field, const BinaryMask& mask, const ClusterConfig& config);

/// Same procedure with an explicit seeding order. `order` must be a
/// permutation of the mask's set pixel indices.
ClusteringResult threshold_cluster_in_order(const EmbeddingField& field, const BinaryMask& mask, double radius,
                                            std::span<const std::size_t> order);

/// Adjusted Rand index over pixels labeled nonzero in both maps.
double partition_agreement(const InstanceMap& a, const InstanceMap& b);

}  // namespace lanekit
