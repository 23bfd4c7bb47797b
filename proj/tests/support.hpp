#pragma once
// Independent oracles and fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lanekit/clustering.hpp"
#include "lanekit/geometry.hpp"
#include "lanekit/losses.hpp"
#include "lanekit/metrics.hpp"
#include "lanekit/synth.hpp"

namespace lanekit::testing {

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lanekit_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Squared distance from (px, py) to segment pq, endpoints taken in (y, x) order.
inline double segment_distance2(Point2 p, Point2 q, double px, double py) {
  if (q.y < p.y || (q.y == p.y && q.x < p.x)) std::swap(p, q);
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - p.x) * dx + (py - p.y) * dy) / len2, 0.0, 1.0);
  const double cx = p.x + t * dx;
  const double cy = p.y + t * dy;
  return (px - cx) * (px - cx) + (py - cy) * (py - cy);
}

/// Per-pixel test of every pixel in each segment's bounding box.
inline std::vector<std::uint8_t> brute_force_raster(const LanePolyline& lane, double width, const ImageGrid& grid) {
  std::vector<std::uint8_t> out(grid.pixel_count(), 0);
  const double r = width / 2.0;
  for (std::size_t i = 0; i + 1 < lane.points.size(); ++i) {
    const Point2 p = lane.points[i];
    const Point2 q = lane.points[i + 1];
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(p.x, q.x) - r)) - 1);
    const int x1 = std::min(grid.width() - 1, static_cast<int>(std::ceil(std::max(p.x, q.x) + r)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(p.y, q.y) - r)) - 1);
    const int y1 = std::min(grid.height() - 1, static_cast<int>(std::ceil(std::max(p.y, q.y) + r)) + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (segment_distance2(p, q, x, y) <= r * r) out[grid.index(x, y)] = 1;
      }
    }
  }
  return out;
}

inline double brute_force_iou(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Largest number of disjoint (gt, pred) pairs with IoU > threshold, by
/// enumerating every partial injection.
inline std::size_t exhaustive_max_matching(const std::vector<std::vector<double>>& iou, std::size_t cols,
                                           double threshold) {
  std::vector<bool> used(cols, false);
  std::size_t best = 0;
  const auto recurse = [&](auto&& self, std::size_t row, std::size_t count) -> void {
    if (row == iou.size()) {
      best = std::max(best, count);
      return;
    }
    self(self, row + 1, count);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!used[c] && iou[row][c] > threshold) {
        used[c] = true;
        self(self, row + 1, count + 1);
        used[c] = false;
      }
    }
  };
  recurse(recurse, 0, 0);
  return best;
}

/// TP/FP/FN of one frame from brute-force rasters and exhaustive matching.
inline LaneCounts oracle_frame_counts(const CulaneFrame& frame, double width, double threshold) {
  std::vector<std::vector<std::uint8_t>> gt;
  std::vector<std::vector<std::uint8_t>> pred;
  for (const auto& l : frame.gt_lanes) gt.push_back(brute_force_raster(l, width, frame.grid));
  for (const auto& l : frame.pred_lanes) pred.push_back(brute_force_raster(l, width, frame.grid));
  std::vector<std::vector<double>> iou(gt.size(), std::vector<double>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) iou[i][j] = brute_force_iou(gt[i], pred[j]);
  }
  const std::size_t tp = exhaustive_max_matching(iou, pred.size(), threshold);
  return {tp, pred.size() - tp, gt.size() - tp};
}

/// Smooth lane from the bottom edge upward with random lateral drift.
inline LanePolyline random_lane(std::mt19937_64& rng, const ImageGrid& grid, int points) {
  std::uniform_real_distribution<double> x0(0.0, grid.width() - 1.0);
  std::uniform_real_distribution<double> slope(-1.5, 1.5);
  std::uniform_real_distribution<double> top(0.0, grid.height() * 0.5);
  const double xb = x0(rng);
  const double s = slope(rng);
  const double y_top = top(rng);
  const double y_bottom = grid.height() - 1.0;
  LanePolyline lane;
  for (int i = 0; i < points; ++i) {
    const double y = y_top + (y_bottom - y_top) * i / (points - 1.0);
    lane.points.push_back({xb + s * (y_bottom - y), y});
  }
  return lane;
}

inline LanePolyline shifted(const LanePolyline& lane, double dx) {
  LanePolyline out = lane;
  for (Point2& p : out.points) p.x += dx;
  return out;
}

/// Embedding field where every lane's pixels lie strictly within delta_v of a
/// mean and means are at least delta_d apart.
struct SeparatedField {
  EmbeddingField field;
  BinaryMask mask;
  InstanceMap truth;
  std::uint32_t lanes;
};

inline SeparatedField separated_field(std::uint64_t seed, double delta_v, double delta_d) {
  std::mt19937_64 rng(seed);
  const ImageGrid grid(24, 12);
  const std::size_t dim = 3;
  std::uniform_int_distribution<std::uint32_t> lane_count(1, 6);
  const std::uint32_t lanes = lane_count(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<double>> means;
  while (means.size() < lanes) {
    std::vector<double> m(dim);
    for (double& v : m) v = normal(rng) * delta_d * 1.5;
    bool ok = true;
    for (const auto& o : means) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) d2 += (m[k] - o[k]) * (m[k] - o[k]);
      ok = ok && std::sqrt(d2) >= delta_d;
    }
    if (ok) means.push_back(std::move(m));
  }

  BinaryMask mask(grid);
  InstanceMap truth(grid);
  EmbeddingField field(grid, dim, 0.0);
  std::uniform_int_distribution<std::uint32_t> pick(0, lanes);
  for (std::size_t p = 0; p < grid.pixel_count(); ++p) {
    std::uint32_t l = p < lanes ? static_cast<std::uint32_t>(p) + 1 : pick(rng);
    truth.values()[p] = l;
    mask.values()[p] = l ? 1 : 0;
    std::vector<double> dir(dim);
    double norm = 0.0;
    for (double& v : dir) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    // Half the pixels sit just inside the margin sphere.
    const double radius = delta_v * (unit(rng) < 0.5 ? 0.999 : std::cbrt(unit(rng)) * 0.999);
    for (std::size_t k = 0; k < dim; ++k) {
      field.at(p)[k] = l ? means[l - 1][k] + radius * dir[k] / norm : normal(rng);
    }
  }
  return {std::move(field), std::move(mask), std::move(truth), lanes};
}

/// Four-lane scene whose starting field mimics an untrained network: each
/// lane gets a random center with small per-pixel noise, and centers sit
/// well inside the clustering radius of each other.
struct RecoveryFixture {
  Scene scene;
  EmbeddingField initial;
  ClusterAssignment assign;
};

inline RecoveryFixture recovery_fixture(std::uint64_t seed) {
  SceneSpec spec;
  spec.grid = ImageGrid(64, 24);
  spec.lane_count = 4;
  spec.lane_width = 2.0;
  spec.samples = 24;
  spec.delta_v = 0.5;
  spec.delta_d = 3.1;
  spec.seed = seed;
  Scene scene = generate_scene(spec);
  ClusterAssignment assign = ClusterAssignment::from_instances(scene.instances);
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  EmbeddingField initial(spec.grid, spec.embedding_dim, 0.0);
  for (std::uint32_t c = 1; c <= assign.lane_count(); ++c) {
    std::vector<double> center(spec.embedding_dim);
    for (double& v : center) v = 0.3 * normal(rng);
    for (std::size_t p : assign.members(c)) {
      for (std::size_t k = 0; k < center.size(); ++k) initial.at(p)[k] = center[k] + 0.1 * normal(rng);
    }
  }
  return {std::move(scene), std::move(initial), std::move(assign)};
}

}  // namespace lanekit::testing
