#include "lanekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lanekit {

ImageGrid::ImageGrid(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("image grid dimensions must be positive");
  }
}

std::size_t count_set(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.values().begin(), mask.values().end(), [](std::uint8_t v) { return v != 0; }));
}

std::uint32_t instance_count(const InstanceMap& map) {
  const auto values = map.values();
  return values.empty() ? 0u : *std::max_element(values.begin(), values.end());
}

LaneFootprint::LaneFootprint(ImageGrid grid, std::vector<RowSpan> spans)
    : grid_(grid), spans_(std::move(spans)) {
  for (const RowSpan& s : spans_) {
    if (s.row < 0 || s.row >= grid_.height() || s.x_begin < 0 || s.x_end >= grid_.width() ||
        s.x_begin > s.x_end) {
      throw InvalidArgument("footprint span outside grid");
    }
    area_ += static_cast<std::size_t>(s.x_end - s.x_begin + 1);
  }
}

void LaneFootprint::paint(BinaryMask& mask) const {
  if (!(mask.grid() == grid_)) {
    throw InvalidArgument("grid mismatch");
  }
  for (const RowSpan& s : spans_) {
    for (int x = s.x_begin; x <= s.x_end; ++x) {
      mask(x, s.row) = 1;
    }
  }
}

BinaryMask LaneFootprint::to_mask() const {
  BinaryMask mask(grid_);
  paint(mask);
  return mask;
}

namespace {

// Endpoints are stored in canonical (y, x) order so a segment and its reverse
// evaluate bit-identical distances.
struct Segment {
  Point2 a;
  Point2 b;

  Segment(Point2 p, Point2 q) {
    if (q.y < p.y || (q.y == p.y && q.x < p.x)) {
      std::swap(p, q);
    }
    a = p;
    b = q;
  }

  double squared_distance(double px, double py) const {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
      t = std::clamp(((px - a.x) * dx + (py - a.y) * dy) / len2, 0.0, 1.0);
    }
    const double cx = a.x + t * dx;
    const double cy = a.y + t * dy;
    return (px - cx) * (px - cx) + (py - cy) * (py - cy);
  }
};

struct Interval {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  bool empty() const { return lo > hi; }
  void hull(const Interval& o) {
    if (o.empty()) return;
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
  void intersect(const Interval& o) {
    lo = std::max(lo, o.lo);
    hi = std::min(hi, o.hi);
  }
};

// Solutions of lo <= c * x + d <= hi.
Interval linear_band(double c, double d, double lo, double hi) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (std::abs(c) < 1e-12) {
    return (d >= lo && d <= hi) ? Interval{-kInf, kInf} : Interval{};
  }
  double x0 = (lo - d) / c;
  double x1 = (hi - d) / c;
  if (x0 > x1) std::swap(x0, x1);
  return {x0, x1};
}

Interval disc_row(const Point2& c, double y, double r) {
  const double dy = y - c.y;
  if (std::abs(dy) > r) return {};
  const double h = std::sqrt(std::max(0.0, r * r - dy * dy));
  return {c.x - h, c.x + h};
}

// Superset of the capsule's intersection with row y.
Interval capsule_row(const Segment& s, double y, double r) {
  Interval out = disc_row(s.a, y, r);
  out.hull(disc_row(s.b, y, r));
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len = std::hypot(dx, dy);
  if (len > 0.0) {
    const double ux = dx / len;
    const double uy = dy / len;
    // along: (x - ax) ux + (y - ay) uy in [0, len]; across: (x - ax)(-uy) + (y - ay) ux in [-r, r]
    Interval band = linear_band(ux, -s.a.x * ux + (y - s.a.y) * uy, 0.0, len);
    band.intersect(linear_band(-uy, s.a.x * uy + (y - s.a.y) * ux, -r, r));
    out.hull(band);
  }
  return out;
}

}  // namespace

LaneFootprint rasterize_footprint(const LanePolyline& lane, double width, const ImageGrid& grid) {
  if (lane.points.size() < 2) {
    throw InvalidArgument("degenerate polyline");
  }
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidArgument("lane width must be positive");
  }
  const double r = width / 2.0;
  const double r2 = r * r;
  const double slack = r + 1e-6 * std::max(1.0, r);

  std::vector<RowSpan> runs;
  for (std::size_t i = 0; i + 1 < lane.points.size(); ++i) {
    const Segment seg(lane.points[i], lane.points[i + 1]);
    const int row_begin = std::max(0, static_cast<int>(std::ceil(seg.a.y - slack)));
    const int row_end = std::min(grid.height() - 1, static_cast<int>(std::floor(seg.b.y + slack)));
    for (int row = row_begin; row <= row_end; ++row) {
      const Interval cand = capsule_row(seg, row, slack);
      if (cand.empty()) continue;
      const double lo = std::max(cand.lo, 0.0);
      const double hi = std::min(cand.hi, static_cast<double>(grid.width() - 1));
      if (lo > hi) continue;
      int xb = static_cast<int>(std::ceil(lo));
      int xe = static_cast<int>(std::floor(hi));
      // The exact predicate decides boundary pixels; the row slice of a capsule is an interval.
      while (xb <= xe && seg.squared_distance(xb, row) > r2) ++xb;
      while (xe >= xb && seg.squared_distance(xe, row) > r2) --xe;
      if (xb <= xe) runs.push_back({row, xb, xe});
    }
  }

  std::sort(runs.begin(), runs.end(), [](const RowSpan& l, const RowSpan& r) {
    return l.row != r.row ? l.row < r.row : l.x_begin < r.x_begin;
  });
  std::vector<RowSpan> merged;
  merged.reserve(runs.size());
  for (const RowSpan& s : runs) {
    if (!merged.empty() && merged.back().row == s.row && s.x_begin <= merged.back().x_end + 1) {
      merged.back().x_end = std::max(merged.back().x_end, s.x_end);
    } else {
      merged.push_back(s);
    }
  }
  return LaneFootprint(grid, std::move(merged));
}

BinaryMask rasterize_lane(const LanePolyline& lane, double width, const ImageGrid& grid) {
  return rasterize_footprint(lane, width, grid).to_mask();
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.grid() == b.grid())) {
    throw InvalidArgument("grid mismatch");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const bool ia = va[i] != 0;
    const bool ib = vb[i] != 0;
    inter += (ia && ib) ? 1 : 0;
    uni += (ia || ib) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t footprint_intersection(const LaneFootprint& a, const LaneFootprint& b) {
  if (!(a.grid() == b.grid())) {
    throw InvalidArgument("grid mismatch");
  }
  const auto sa = a.spans();
  const auto sb = b.spans();
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t inter = 0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i].row != sb[j].row) {
      (sa[i].row < sb[j].row) ? ++i : ++j;
      continue;
    }
    const int lo = std::max(sa[i].x_begin, sb[j].x_begin);
    const int hi = std::min(sa[i].x_end, sb[j].x_end);
    if (lo <= hi) inter += static_cast<std::size_t>(hi - lo + 1);
    (sa[i].x_end < sb[j].x_end) ? ++i : ++j;
  }
  return inter;
}

double footprint_iou(const LaneFootprint& a, const LaneFootprint& b) {
  const std::size_t inter = footprint_intersection(a, b);
  const std::size_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

HeatMap smooth_point_map(std::span<const PixelPoint> points, const ImageGrid& grid,
                         const SmoothingOptions& options) {
  const int k = options.kernel_size;
  if (k < 1 || k % 2 == 0) {
    throw InvalidArgument("kernel size must be odd and positive");
  }
  const int half = k / 2;
  std::vector<double> kernel(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  if (options.kernel == SmoothingKernel::kBox) {
    std::fill(kernel.begin(), kernel.end(), 1.0 / static_cast<double>(kernel.size()));
  } else {
    if (!(options.gaussian_sigma > 0.0)) {
      throw InvalidArgument("gaussian sigma must be positive");
    }
    double total = 0.0;
    for (int dy = -half; dy <= half; ++dy) {
      for (int dx = -half; dx <= half; ++dx) {
        const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * options.gaussian_sigma * options.gaussian_sigma));
        kernel[static_cast<std::size_t>((dy + half) * k + (dx + half))] = w;
        total += w;
      }
    }
    for (double& w : kernel) w /= total;
  }

  HeatMap heat(grid, 0.0);
  for (const PixelPoint& p : points) {
    if (!grid.contains(p.x, p.y)) {
      throw InvalidArgument("point out of bounds");
    }
    for (int dy = -half; dy <= half; ++dy) {
      for (int dx = -half; dx <= half; ++dx) {
        const int x = p.x + dx;
        const int y = p.y + dy;
        if (grid.contains(x, y)) {
          heat(x, y) += kernel[static_cast<std::size_t>((dy + half) * k + (dx + half))];
        }
      }
    }
  }
  return heat;
}

LaneTargets targets_from_lanes(std::span<const LanePolyline> lanes, double width, const ImageGrid& grid) {
  LaneTargets targets{BinaryMask(grid), InstanceMap(grid)};
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const LaneFootprint fp = rasterize_footprint(lanes[i], width, grid);
    const auto label = static_cast<std::uint32_t>(i + 1);
    for (const RowSpan& s : fp.spans()) {
      for (int x = s.x_begin; x <= s.x_end; ++x) {
        targets.mask(x, s.row) = 1;
        targets.instances(x, s.row) = label;
      }
    }
  }
  return targets;
}

}  // namespace lanekit
