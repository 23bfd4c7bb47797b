#pragma once

// Lane-detection benchmark metrics: TuSimple point accuracy with lane-level
// FP/FN rates, and the IoU-matched F1 used by CULane and BDD100K.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanekit/geometry.hpp"

namespace lanekit {

/// x values of one lane at the frame's h_samples; negative means absent.
using SampledLane = std::vector<double>;

inline constexpr double kAbsentX = -2.0;

struct TuSimpleFrame {
  std::vector<double> h_samples;
  std::vector<SampledLane> gt_lanes;
  std::vector<SampledLane> pred_lanes;
};

enum class Category : std::uint8_t {
  kNormal,
  kCrowded,
  kNight,
  kNoLine,
  kShadow,
  kArrow,
  kDazzleLight,
  kCurve,
  kCrossroad,
};

inline constexpr std::array<Category, 9> kAllCategories = {
    Category::kNormal, Category::kCrowded,     Category::kNight, Category::kNoLine,    Category::kShadow,
    Category::kArrow,  Category::kDazzleLight, Category::kCurve, Category::kCrossroad,
};

/// Stable identifier used in files ("Normal", "NoLine", "DazzleLight", ...).
std::string_view category_name(Category c);
/// Row label of the results table ("No line", "Dazzle light", ...).
std::string_view category_label(Category c);
/// Accepts identifiers, table labels and the CULane split names
/// ("crowd", "hlight", "cross", ...), case-insensitively.
std::optional<Category> parse_category(std::string_view text);

struct CulaneFrame {
  ImageGrid grid{1640, 590};
  Category category = Category::kNormal;
  std::vector<LanePolyline> gt_lanes;
  std::vector<LanePolyline> pred_lanes;
};

struct LaneCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  double precision() const;
  double recall() const;
  /// 2PR / (P + R); 0 when P + R = 0.
  double f1() const;

  LaneCounts& operator+=(const LaneCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const LaneCounts&, const LaneCounts&) = default;
};

struct CategoryResult {
  Category category = Category::kNormal;
  std::uint64_t frames = 0;
  LaneCounts counts;
  friend bool operator==(const CategoryResult&, const CategoryResult&) = default;
};

struct TuSimpleTotals {
  std::uint64_t correct_points = 0;
  std::uint64_t gt_points = 0;
  std::uint64_t gt_lanes = 0;
  std::uint64_t pred_lanes = 0;

  double accuracy() const;
  /// Unmatched predictions over all predictions.
  double fp_rate(const LaneCounts& counts) const;
  /// Missed GT lanes over all GT lanes.
  double fn_rate(const LaneCounts& counts) const;
  friend bool operator==(const TuSimpleTotals&, const TuSimpleTotals&) = default;
};

enum class MetricKind : std::uint8_t { kTuSimple, kCulane };

struct EvalReport {
  MetricKind metric = MetricKind::kCulane;
  /// CULane: summed over every category except Crossroad.
  LaneCounts totals;
  std::optional<TuSimpleTotals> tusimple;
  /// CULane: one row per category in kAllCategories order.
  std::vector<CategoryResult> per_category;
  std::map<std::string, double> parameters;
  std::vector<std::string> notes;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct TuSimpleOptions {
  double x_tolerance = 20.0;
  /// Fraction of a GT lane's points a prediction must hit to match it.
  double lane_match_fraction = 0.85;
};

EvalReport tusimple_accuracy(std::span<const TuSimpleFrame> frames, const TuSimpleOptions& options = {});

struct CulaneOptions {
  double lane_width = 30.0;
  double iou_threshold = 0.5;
};

inline constexpr double kCulaneLaneWidth = 30.0;
inline constexpr double kBdd100kLaneWidth = 8.0;

struct FrameCounts {
  Category category = Category::kNormal;
  LaneCounts counts;
};

/// TP/FP/FN of a single frame. Crossroad frames must carry no GT lanes and
/// report every prediction as FP.
FrameCounts culane_frame_counts(const CulaneFrame& frame, const CulaneOptions& options = {});

EvalReport culane_f1(std::span<const CulaneFrame> frames, const CulaneOptions& options = {});

/// Per-category rows plus totals over all non-Crossroad frames.
EvalReport aggregate_by_category(std::span<const FrameCounts> per_frame);

}  // namespace lanekit
