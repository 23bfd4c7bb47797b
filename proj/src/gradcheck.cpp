#include "lanekit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lanekit/losses.hpp"

namespace lanekit {

namespace {

constexpr int kGridWidth = 4;
constexpr int kGridHeight = 2;
constexpr std::size_t kEmbeddingDim = 2;

struct ClusteringInstance {
  ClusterAssignment assign;
  std::vector<double> point;
};

// Distance of every hinge argument from its kink.
double kink_clearance(const EmbeddingField& field, const ClusterAssignment& assign, const LossParams& params) {
  const ClusterMeans means = cluster_means(field, assign);
  double clearance = std::numeric_limits<double>::infinity();
  for (std::uint32_t c = 1; c <= assign.lane_count(); ++c) {
    const auto mu = means.mean(c - 1);
    for (std::size_t pixel : assign.members(c)) {
      double n = 0.0;
      for (std::size_t k = 0; k < field.dim(); ++k) n += (mu[k] - field.at(pixel)[k]) * (mu[k] - field.at(pixel)[k]);
      clearance = std::min(clearance, std::abs(n - params.delta_v()));
    }
  }
  for (std::size_t a = 0; a < means.count(); ++a) {
    for (std::size_t b = a + 1; b < means.count(); ++b) {
      double n = 0.0;
      for (std::size_t k = 0; k < means.dim; ++k) n += (means.mean(a)[k] - means.mean(b)[k]) * (means.mean(a)[k] - means.mean(b)[k]);
      clearance = std::min(clearance, std::abs(params.delta_d() - n));
    }
  }
  return clearance;
}

ClusteringInstance random_clustering_instance(std::mt19937_64& rng, const LossParams& params, double clearance) {
  const ImageGrid grid(kGridWidth, kGridHeight);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  while (true) {
    std::vector<std::uint32_t> labels(grid.pixel_count());
    for (auto& l : labels) l = coin(rng) ? 2u : 1u;
    labels[0] = 1;
    labels[1] = 2;
    std::vector<double> point(grid.pixel_count() * kEmbeddingDim);
    for (double& v : point) v = normal(rng);
    ClusterAssignment assign(std::move(labels), 2);
    const EmbeddingField field(grid, kEmbeddingDim, point);
    if (kink_clearance(field, assign, params) > clearance) return {std::move(assign), std::move(point)};
  }
}

GradCheckResult check_loss(const std::string& name, std::size_t trials, std::uint64_t seed, double step,
                           const auto& make_instance) {
  GradCheckResult result{name, 0.0, seed};
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t instance_seed = seed + t;
    std::mt19937_64 rng(instance_seed);
    auto [objective, point] = make_instance(rng);
    double err = 0.0;
    try {
      err = finite_diff_check(objective, point, step);
    } catch (const InvalidArgument&) {
      throw;
    } catch (const Error& e) {
      throw Error(name + ": instance seed " + std::to_string(instance_seed) + ": " + e.what());
    }
    if (!std::isfinite(err)) {
      throw Error(name + ": instance seed " + std::to_string(instance_seed) + ": non-finite error");
    }
    if (err > result.max_relative_error || t == 0) {
      result.max_relative_error = err;
      result.worst_seed = instance_seed;
    }
  }
  return result;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& options) {
  if (options.trials < 1) throw InvalidArgument("trials must be >= 1");
  if (!(options.step > 0.0) || !std::isfinite(options.step)) throw InvalidArgument("step must be positive");

  const LossParams params(0.5, 3.1);
  const double clearance = std::max(1e-3, 100.0 * options.step);
  std::vector<GradCheckResult> results;

  results.push_back(check_loss("clustering_loss", options.trials, options.seed, options.step, [&](std::mt19937_64& rng) {
    ClusteringInstance inst = random_clustering_instance(rng, params, clearance);
    const bool corrupt = options.corrupt_gradient;
    Objective f = [assign = std::move(inst.assign), params, corrupt](std::span<const double> x) {
      const EmbeddingField field(ImageGrid(kGridWidth, kGridHeight), kEmbeddingDim,
                                 std::vector<double>(x.begin(), x.end()));
      LossValue v = clustering_loss(field, assign, params);
      if (corrupt) v.gradient[0] += 1e-3;
      return v;
    };
    return std::make_pair(std::move(f), std::move(inst.point));
  }));

  const ImageGrid map_grid(4, 4);
  results.push_back(check_loss("weighted_binary_ce", options.trials, options.seed, options.step, [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    std::bernoulli_distribution coin(0.3);
    std::vector<std::uint8_t> bits(map_grid.pixel_count());
    for (auto& b : bits) b = coin(rng) ? 1 : 0;
    std::vector<double> point(map_grid.pixel_count());
    for (double& p : point) p = prob(rng);
    Objective f = [target = BinaryMask(map_grid, std::move(bits)), map_grid](std::span<const double> x) {
      return weighted_binary_ce(ProbabilityMap(map_grid, std::vector<double>(x.begin(), x.end())), target);
    };
    return std::make_pair(std::move(f), std::move(point));
  }));

  results.push_back(check_loss("l2_loss", options.trials, options.seed, options.step, [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<double> target(map_grid.pixel_count());
    for (double& v : target) v = value(rng);
    std::vector<double> point(map_grid.pixel_count());
    for (double& v : point) v = value(rng);
    Objective f = [target = HeatMap(map_grid, std::move(target)), map_grid](std::span<const double> x) {
      return l2_loss(HeatMap(map_grid, std::vector<double>(x.begin(), x.end())), target);
    };
    return std::make_pair(std::move(f), std::move(point));
  }));

  return results;
}

}  // namespace lanekit
