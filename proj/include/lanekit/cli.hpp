#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lanekit/geometry.hpp"
#include "lanekit/io.hpp"
#include "lanekit/metrics.hpp"

namespace lanekit {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
};

struct CulaneCorpusOptions {
  CulaneOptions metric;
  ImageGrid grid{1640, 590};
  /// Worker count; results never depend on it.
  std::size_t threads = 1;
  /// Missing prediction files are errors instead of empty predictions.
  bool strict = false;
  /// Frames loaded and evaluated per batch.
  std::size_t batch_size = 2048;
};

/// Evaluates every manifest frame with GT from gt_root and predictions from
/// pred_root. Warnings go to `log` in manifest order.
EvalReport evaluate_culane_corpus(const DatasetManifest& manifest, const std::filesystem::path& gt_root,
                                  const std::filesystem::path& pred_root, const CulaneCorpusOptions& options,
                                  std::ostream& log);

/// Entry point of the lanekit tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lanekit
