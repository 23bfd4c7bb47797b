#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lanekit {

struct GradCheckOptions {
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  double step = 1e-5;
  /// Test hook: perturbs one analytic gradient entry of the clustering loss.
  bool corrupt_gradient = false;
};

struct GradCheckResult {
  std::string loss;
  double max_relative_error = 0.0;
  /// Seed of the instance that produced the maximum.
  std::uint64_t worst_seed = 0;
};

/// Runs finite_diff_check on clustering_loss, weighted_binary_ce and l2_loss
/// over seeded random instances away from hinge kinks. Throws lanekit::Error
/// (message carries the instance seed) when a loss turns non-finite.
std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& options);

}  // namespace lanekit
