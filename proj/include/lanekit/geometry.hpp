#pragma once

// Lane geometry: image grids, pixel rasters, polyline rasterization, mask
// overlap and the smoothed lane-point regression targets.
//
// Pixel (x, y) has its center at the integer coordinate (x, y); x indexes
// columns, y indexes rows, storage is row-major.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lanekit/error.hpp"

namespace lanekit {

class ImageGrid {
 public:
  ImageGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  int width_;
  int height_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// One lane instance as an ordered list of points in pixel units.
/// Parsers produce points sorted by increasing y; the rasterizer accepts any order.
struct LanePolyline {
  std::vector<Point2> points;
  friend bool operator==(const LanePolyline&, const LanePolyline&) = default;
};

/// Dense H x W array of T bound to a grid. Tag keeps semantically different
/// rasters with the same element type apart.
template <class T, class Tag>
class Raster {
 public:
  using value_type = T;

  explicit Raster(ImageGrid grid, T fill = T{}) : grid_(grid), values_(grid.pixel_count(), fill) {}
  Raster(ImageGrid grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.pixel_count()) {
      throw InvalidArgument("raster size does not match grid");
    }
  }

  const ImageGrid& grid() const { return grid_; }
  T operator()(int x, int y) const { return values_[grid_.index(x, y)]; }
  T& operator()(int x, int y) { return values_[grid_.index(x, y)]; }
  std::span<const T> values() const { return values_; }
  std::span<T> values() { return values_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  ImageGrid grid_;
  std::vector<T> values_;
};

using BinaryMask = Raster<std::uint8_t, struct BinaryMaskTag>;
/// Road region between lanes; carried as a type only, no operation consumes it.
using DrivableMask = Raster<std::uint8_t, struct DrivableMaskTag>;
/// Non-negative regression target (smoothed lane-point map).
using HeatMap = Raster<double, struct HeatMapTag>;
/// Per-pixel lane probability in (0, 1).
using ProbabilityMap = Raster<double, struct ProbabilityMapTag>;
/// Per-pixel instance label: 0 background, 1..L lanes.
using InstanceMap = Raster<std::uint32_t, struct InstanceMapTag>;

std::size_t count_set(const BinaryMask& mask);
/// Largest label present; equals L for a contiguous labeling.
std::uint32_t instance_count(const InstanceMap& map);

/// Inclusive run of set pixels [x_begin, x_end] on one row.
struct RowSpan {
  int row = 0;
  int x_begin = 0;
  int x_end = 0;
  friend bool operator==(const RowSpan&, const RowSpan&) = default;
};

/// Run-length form of a rasterized lane. Spans are sorted by (row, x_begin)
/// and never overlap or touch within a row.
class LaneFootprint {
 public:
  LaneFootprint(ImageGrid grid, std::vector<RowSpan> spans);

  const ImageGrid& grid() const { return grid_; }
  std::span<const RowSpan> spans() const { return spans_; }
  std::size_t area() const { return area_; }

  BinaryMask to_mask() const;
  void paint(BinaryMask& mask) const;

 private:
  ImageGrid grid_;
  std::vector<RowSpan> spans_;
  std::size_t area_ = 0;
};

/// Pixels whose center lies within width/2 (Euclidean) of any segment of the
/// lane, clipped to the grid. Throws on fewer than two points or width <= 0.
LaneFootprint rasterize_footprint(const LanePolyline& lane, double width, const ImageGrid& grid);
BinaryMask rasterize_lane(const LanePolyline& lane, double width, const ImageGrid& grid);

/// |a & b| / |a | b|, 0 when the union is empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);
double footprint_iou(const LaneFootprint& a, const LaneFootprint& b);
std::size_t footprint_intersection(const LaneFootprint& a, const LaneFootprint& b);

struct PixelPoint {
  int x = 0;
  int y = 0;
};

enum class SmoothingKernel { kBox, kGaussian };

struct SmoothingOptions {
  int kernel_size = 11;
  SmoothingKernel kernel = SmoothingKernel::kBox;
  /// Only used by the Gaussian kernel.
  double gaussian_sigma = 2.0;
};

/// Deposits one normalized kernel per point. Overlaps add up; kernels are
/// clipped at the border without renormalization.
HeatMap smooth_point_map(std::span<const PixelPoint> points, const ImageGrid& grid,
                         const SmoothingOptions& options = {});

struct LaneTargets {
  BinaryMask mask;
  InstanceMap instances;
};

/// Binary segmentation target plus instance labels 1..L in input order; where
/// lanes overlap the later lane wins.
LaneTargets targets_from_lanes(std::span<const LanePolyline> lanes, double width, const ImageGrid& grid);

}  // namespace lanekit
