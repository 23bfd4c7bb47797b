#include "lanekit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lanekit/matching.hpp"

namespace lanekit {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::kNormal: return "Normal";
    case Category::kCrowded: return "Crowded";
    case Category::kNight: return "Night";
    case Category::kNoLine: return "NoLine";
    case Category::kShadow: return "Shadow";
    case Category::kArrow: return "Arrow";
    case Category::kDazzleLight: return "DazzleLight";
    case Category::kCurve: return "Curve";
    case Category::kCrossroad: return "Crossroad";
  }
  return "Normal";
}

std::string_view category_label(Category c) {
  switch (c) {
    case Category::kNoLine: return "No line";
    case Category::kDazzleLight: return "Dazzle light";
    default: return category_name(c);
  }
}

std::optional<Category> parse_category(std::string_view text) {
  std::string key;
  for (char ch : text) {
    if (ch == ' ' || ch == '_' || ch == '-') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  for (Category c : kAllCategories) {
    std::string name;
    for (char ch : category_name(c)) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (key == name) return c;
  }
  if (key == "crowd") return Category::kCrowded;
  if (key == "hlight" || key == "dazzle") return Category::kDazzleLight;
  if (key == "cross") return Category::kCrossroad;
  return std::nullopt;
}

double LaneCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double LaneCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double LaneCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double TuSimpleTotals::accuracy() const {
  return gt_points == 0 ? 0.0 : static_cast<double>(correct_points) / static_cast<double>(gt_points);
}

double TuSimpleTotals::fp_rate(const LaneCounts& counts) const {
  return pred_lanes == 0 ? 0.0 : static_cast<double>(counts.fp) / static_cast<double>(pred_lanes);
}

double TuSimpleTotals::fn_rate(const LaneCounts& counts) const {
  return gt_lanes == 0 ? 0.0 : static_cast<double>(counts.fn) / static_cast<double>(gt_lanes);
}

namespace {

void check_sampled_lanes(const std::vector<SampledLane>& lanes, std::size_t samples, std::string_view what,
                         std::size_t frame) {
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    if (lanes[i].size() != samples) {
      throw InvalidArgument("frame " + std::to_string(frame) + ": " + std::string(what) + " lane " +
                            std::to_string(i) + " has " + std::to_string(lanes[i].size()) + " points, expected " +
                            std::to_string(samples));
    }
  }
}

}  // namespace

EvalReport tusimple_accuracy(std::span<const TuSimpleFrame> frames, const TuSimpleOptions& options) {
  if (frames.empty()) throw InvalidArgument("no frames to evaluate");
  if (!(options.x_tolerance > 0.0)) throw InvalidArgument("x tolerance must be positive");

  EvalReport report;
  report.metric = MetricKind::kTuSimple;
  TuSimpleTotals totals;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const TuSimpleFrame& frame = frames[f];
    const std::size_t samples = frame.h_samples.size();
    check_sampled_lanes(frame.gt_lanes, samples, "gt", f);
    check_sampled_lanes(frame.pred_lanes, samples, "pred", f);

    std::vector<char> pred_matches(frame.pred_lanes.size(), 0);
    for (const SampledLane& gt : frame.gt_lanes) {
      const auto present = static_cast<std::uint64_t>(
          std::count_if(gt.begin(), gt.end(), [](double x) { return x >= 0.0; }));
      if (present == 0) continue;
      std::uint64_t best = 0;
      for (std::size_t p = 0; p < frame.pred_lanes.size(); ++p) {
        const SampledLane& pred = frame.pred_lanes[p];
        std::uint64_t correct = 0;
        for (std::size_t j = 0; j < samples; ++j) {
          if (gt[j] >= 0.0 && pred[j] >= 0.0 && std::abs(pred[j] - gt[j]) <= options.x_tolerance) ++correct;
        }
        best = std::max(best, correct);
        if (static_cast<double>(correct) >= options.lane_match_fraction * static_cast<double>(present)) {
          pred_matches[p] = 1;
        }
      }
      totals.correct_points += best;
      totals.gt_points += present;
      ++totals.gt_lanes;
      if (static_cast<double>(best) >= options.lane_match_fraction * static_cast<double>(present)) {
        ++report.totals.tp;
      } else {
        ++report.totals.fn;
      }
    }
    totals.pred_lanes += frame.pred_lanes.size();
    report.totals.fp += static_cast<std::uint64_t>(std::count(pred_matches.begin(), pred_matches.end(), 0));
  }
  report.tusimple = totals;
  report.parameters = {{"x_tolerance", options.x_tolerance}, {"lane_match_fraction", options.lane_match_fraction}};
  report.notes = {
      "point correct when both x values are present and |x_pred - x_gt| <= x_tolerance",
      "accuracy pools correct points over all frames; each GT lane takes its best prediction",
      "FN: GT lane whose best prediction hits fewer than lane_match_fraction of its points",
      "FP: prediction reaching lane_match_fraction against no GT lane",
  };
  return report;
}

FrameCounts culane_frame_counts(const CulaneFrame& frame, const CulaneOptions& options) {
  if (!(options.lane_width > 0.0)) throw InvalidArgument("lane width must be positive");
  if (!(options.iou_threshold > 0.0 && options.iou_threshold <= 1.0)) {
    throw InvalidArgument("IoU threshold must be in (0, 1]");
  }
  FrameCounts out{frame.category, {}};
  if (frame.category == Category::kCrossroad) {
    if (!frame.gt_lanes.empty()) throw InvalidArgument("crossroad frame carries ground-truth lanes");
    out.counts.fp = frame.pred_lanes.size();
    return out;
  }

  std::vector<LaneFootprint> gt;
  gt.reserve(frame.gt_lanes.size());
  for (const LanePolyline& lane : frame.gt_lanes) gt.push_back(rasterize_footprint(lane, options.lane_width, frame.grid));
  std::vector<LaneFootprint> pred;
  pred.reserve(frame.pred_lanes.size());
  for (const LanePolyline& lane : frame.pred_lanes) {
    pred.push_back(rasterize_footprint(lane, options.lane_width, frame.grid));
  }

  ScoreMatrix iou{gt.size(), pred.size(), std::vector<double>(gt.size() * pred.size(), 0.0)};
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) iou.scores[g * pred.size() + p] = footprint_iou(gt[g], pred[p]);
  }
  const std::vector<std::size_t> match = threshold_matching(iou, options.iou_threshold);
  const auto tp = static_cast<std::uint64_t>(std::count_if(match.begin(), match.end(),
                                                           [](std::size_t c) { return c != kUnmatched; }));
  out.counts = {tp, pred.size() - tp, gt.size() - tp};
  return out;
}

EvalReport culane_f1(std::span<const CulaneFrame> frames, const CulaneOptions& options) {
  std::vector<FrameCounts> counts;
  counts.reserve(frames.size());
  for (const CulaneFrame& frame : frames) counts.push_back(culane_frame_counts(frame, options));
  EvalReport report = aggregate_by_category(counts);
  report.parameters = {{"lane_width", options.lane_width}, {"iou_threshold", options.iou_threshold}};
  return report;
}

EvalReport aggregate_by_category(std::span<const FrameCounts> per_frame) {
  EvalReport report;
  report.metric = MetricKind::kCulane;
  for (Category c : kAllCategories) report.per_category.push_back({c, 0, {}});
  for (const FrameCounts& f : per_frame) {
    CategoryResult& row = report.per_category[static_cast<std::size_t>(f.category)];
    ++row.frames;
    row.counts += f.counts;
    if (f.category != Category::kCrossroad) report.totals += f.counts;
  }
  report.notes = {
      "TP: matched pair with IoU strictly above iou_threshold (maximum-cardinality matching)",
      "Crossroad frames contribute FP only and are excluded from Total",
  };
  return report;
}

}  // namespace lanekit
