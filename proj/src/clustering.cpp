#include "lanekit/clustering.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace lanekit {

ClusterConfig ClusterConfig::from_margins(const LossParams& params) {
  ClusterConfig config;
  config.radius = 2.0 * params.delta_v();
  return config;
}

namespace {

std::vector<std::size_t> lane_pixels(const BinaryMask& mask) {
  std::vector<std::size_t> pixels;
  const auto bits = mask.values();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0) pixels.push_back(i);
  }
  return pixels;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

void drop_small_instances(ClusteringResult& result, std::size_t min_pixels) {
  std::vector<std::size_t> sizes(result.lane_count + 1, 0);
  for (std::uint32_t label : result.instances.values()) ++sizes[label];
  std::vector<std::uint32_t> relabel(result.lane_count + 1, 0);
  std::uint32_t next = 0;
  for (std::uint32_t c = 1; c <= result.lane_count; ++c) {
    if (sizes[c] >= min_pixels) relabel[c] = ++next;
  }
  for (std::uint32_t& label : result.instances.values()) label = relabel[label];
  result.lane_count = next;
}

}  // namespace

ClusteringResult threshold_cluster_in_order(const EmbeddingField& field, const BinaryMask& mask, double radius,
                                            std::span<const std::size_t> order) {
  if (!(field.grid() == mask.grid())) {
    throw InvalidArgument("grid mismatch between embedding field and mask");
  }
  if (!(radius > 0.0)) {
    throw InvalidArgument("cluster radius must be positive");
  }
  std::vector<std::size_t> remaining = lane_pixels(mask);
  {
    std::vector<std::size_t> sorted(order.begin(), order.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted != remaining) {
      throw InvalidArgument("seed order is not a permutation of the lane pixels");
    }
  }

  ClusteringResult result{InstanceMap(mask.grid()), 0};
  auto labels = result.instances.values();
  const double r2 = radius * radius;
  for (std::size_t seed : order) {
    if (labels[seed] != 0) continue;
    const std::uint32_t id = ++result.lane_count;
    const auto center = field.at(seed);
    labels[seed] = id;
    std::vector<std::size_t> still_free;
    still_free.reserve(remaining.size());
    for (std::size_t pixel : remaining) {
      if (labels[pixel] != 0) continue;
      if (squared_distance(field.at(pixel), center) < r2) {
        labels[pixel] = id;
      } else {
        still_free.push_back(pixel);
      }
    }
    remaining = std::move(still_free);
  }
  return result;
}

ClusteringResult threshold_cluster(const EmbeddingField& field, const BinaryMask& mask, const ClusterConfig& config) {
  if (!(field.grid() == mask.grid())) {
    throw InvalidArgument("grid mismatch between embedding field and mask");
  }
  std::vector<std::size_t> order = lane_pixels(mask);
  if (!config.deterministic) {
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  ClusteringResult result = threshold_cluster_in_order(field, mask, config.radius, order);
  if (config.min_pixels > 1) drop_small_instances(result, config.min_pixels);
  return result;
}

double partition_agreement(const InstanceMap& a, const InstanceMap& b) {
  if (!(a.grid() == b.grid())) {
    throw InvalidArgument("grid mismatch");
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  std::map<std::uint32_t, double> rows;
  std::map<std::uint32_t, double> cols;
  double n = 0.0;
  const auto la = a.values();
  const auto lb = b.values();
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (la[i] == 0 || lb[i] == 0) continue;
    joint[{la[i], lb[i]}] += 1.0;
    rows[la[i]] += 1.0;
    cols[lb[i]] += 1.0;
    n += 1.0;
  }
  if (n == 0.0) {
    throw InvalidArgument("empty overlap");
  }
  const auto pairs = [](double k) { return k * (k - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [key, count] : joint) index += pairs(count);
  double sum_rows = 0.0;
  for (const auto& [key, count] : rows) sum_rows += pairs(count);
  double sum_cols = 0.0;
  for (const auto& [key, count] : cols) sum_cols += pairs(count);

  const double total = pairs(n);
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Zero denominator only happens for identical trivial partitions.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace lanekit
