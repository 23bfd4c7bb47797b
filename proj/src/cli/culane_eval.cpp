#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <thread>

#include "lanekit/cli.hpp"

namespace lanekit {

namespace {

struct FrameOutcome {
  FrameCounts counts;
  std::string warning;
  std::exception_ptr error;
};

FrameOutcome evaluate_entry(const ManifestEntry& entry, const std::filesystem::path& gt_root,
                            const std::filesystem::path& pred_root, const CulaneCorpusOptions& options) {
  FrameOutcome outcome;
  try {
    CulaneFrame frame;
    frame.grid = options.grid;
    frame.category = entry.category;
    frame.gt_lanes = read_culane_lines_file(gt_root / entry.annotation);
    const std::filesystem::path pred_path = pred_root / entry.annotation;
    if (std::filesystem::exists(pred_path)) {
      frame.pred_lanes = read_culane_lines_file(pred_path);
    } else if (options.strict) {
      throw InvalidArgument("missing prediction file " + pred_path.string());
    } else {
      outcome.warning = "warning: missing prediction file " + pred_path.string() + "; counted as empty";
    }
    outcome.counts = culane_frame_counts(frame, options.metric);
  } catch (...) {
    outcome.error = std::current_exception();
  }
  return outcome;
}

}  // namespace

EvalReport evaluate_culane_corpus(const DatasetManifest& manifest, const std::filesystem::path& gt_root,
                                  const std::filesystem::path& pred_root, const CulaneCorpusOptions& options,
                                  std::ostream& log) {
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  std::vector<FrameCounts> counts;
  counts.reserve(manifest.entries.size());

  std::vector<FrameOutcome> outcomes;
  for (std::size_t begin = 0; begin < manifest.entries.size(); begin += batch) {
    const std::size_t end = std::min(manifest.entries.size(), begin + batch);
    outcomes.assign(end - begin, FrameOutcome{});
    std::atomic<std::size_t> next{begin};
    const auto worker = [&] {
      for (std::size_t i = next++; i < end; i = next++) {
        outcomes[i - begin] = evaluate_entry(manifest.entries[i], gt_root, pred_root, options);
      }
    };
    const std::size_t spawn = std::min(threads, end - begin);
    if (spawn <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(spawn);
      for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(worker);
    }
    // Reduce in manifest order so the result is independent of scheduling.
    for (FrameOutcome& outcome : outcomes) {
      if (outcome.error) std::rethrow_exception(outcome.error);
      if (!outcome.warning.empty()) log << outcome.warning << '\n';
      counts.push_back(outcome.counts);
    }
  }

  EvalReport report = aggregate_by_category(counts);
  report.parameters = {{"lane_width", options.metric.lane_width},
                       {"iou_threshold", options.metric.iou_threshold},
                       {"image_width", static_cast<double>(options.grid.width())},
                       {"image_height", static_cast<double>(options.grid.height())}};
  return report;
}

}  // namespace lanekit
