#pragma once

// Discriminative clustering loss over per-pixel embeddings, the auxiliary
// branch losses, a central-difference gradient checker and a plain
// gradient-descent driver.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lanekit/geometry.hpp"

namespace lanekit {

/// H x W x D embedding vectors, stored pixel-major (all D components of a
/// pixel are contiguous).
class EmbeddingField {
 public:
  EmbeddingField(ImageGrid grid, std::size_t dim, double fill = 0.0);
  EmbeddingField(ImageGrid grid, std::size_t dim, std::vector<double> values);

  const ImageGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> at(std::size_t pixel) const { return {values_.data() + pixel * dim_, dim_}; }
  std::span<double> at(std::size_t pixel) { return {values_.data() + pixel * dim_, dim_}; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const EmbeddingField&, const EmbeddingField&) = default;

 private:
  ImageGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Pixel -> instance assignment. Label 0 marks pixels outside every cluster.
class ClusterAssignment {
 public:
  /// Throws "absent instance id" for labels > lane_count and "empty cluster"
  /// when an id in 1..lane_count owns no pixel.
  ClusterAssignment(std::vector<std::uint32_t> labels, std::uint32_t lane_count);

  /// Uses the largest label as L.
  static ClusterAssignment from_instances(const InstanceMap& map);

  std::uint32_t lane_count() const { return lane_count_; }
  std::size_t pixel_count() const { return labels_.size(); }
  std::span<const std::uint32_t> labels() const { return labels_; }
  /// Pixel indices of cluster c (1-based id).
  std::span<const std::size_t> members(std::uint32_t c) const { return members_.at(c - 1); }

 private:
  std::vector<std::uint32_t> labels_;
  std::uint32_t lane_count_;
  std::vector<std::vector<std::size_t>> members_;
};

enum class MarginRule {
  kEnforceSeparation,  // delta_d > 6 delta_v
  kAllowAny,
};

class LossParams {
 public:
  LossParams(double delta_v, double delta_d, MarginRule rule = MarginRule::kEnforceSeparation);

  double delta_v() const { return delta_v_; }
  double delta_d() const { return delta_d_; }

  /// Squared norms inside the hinges (the default), or plain Euclidean norms.
  bool squared_norm = true;
  double var_weight = 1.0;
  double dist_weight = 1.0;

 private:
  double delta_v_;
  double delta_d_;
};

struct LossValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// L means of dimension D, stored flat (cluster-major).
struct ClusterMeans {
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t count() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> mean(std::size_t c) const { return {values.data() + c * dim, dim}; }
};

ClusterMeans cluster_means(const EmbeddingField& field, const ClusterAssignment& assign);

/// Pull term. Gradient is w.r.t. every embedding entry (field layout) and
/// includes the dependence of each mean on its members.
LossValue variance_loss(const EmbeddingField& field, const ClusterAssignment& assign, const LossParams& params);

/// Push term over ordered mean pairs; 0 for a single cluster. Gradient is
/// w.r.t. the flat means.
LossValue distance_loss(const ClusterMeans& means, const LossParams& params);

/// Weighted sum of both terms with the gradient back-propagated to pixels.
LossValue clustering_loss(const EmbeddingField& field, const ClusterAssignment& assign, const LossParams& params);

inline constexpr double kBackgroundWeight = 0.4;

/// Mean over pixels of -w (t log p + (1 - t) log(1 - p)), w = background_weight
/// on background pixels and 1 on lane pixels. Rejects p outside (0, 1).
LossValue weighted_binary_ce(const ProbabilityMap& probabilities, const BinaryMask& target,
                             double background_weight = kBackgroundWeight);

/// Mean squared error; gradient w.r.t. the prediction.
LossValue l2_loss(const HeatMap& prediction, const HeatMap& target);

using Objective = std::function<LossValue(std::span<const double>)>;

/// max_i |analytic_i - central_i| / max(1, |analytic_i|).
double finite_diff_check(const Objective& loss, std::span<const double> point, double step);

struct OptimizationResult {
  EmbeddingField field;
  /// Loss before each update, plus the loss of the returned field.
  std::vector<double> losses;
};

/// Full-batch gradient descent on clustering_loss. Stops early once the loss
/// is exactly zero. Throws DivergedError on a non-finite loss.
OptimizationResult optimize_embeddings(EmbeddingField field, const ClusterAssignment& assign,
                                       const LossParams& params, std::size_t steps, double learning_rate);

}  // namespace lanekit
