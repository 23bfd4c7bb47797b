#pragma once

// Benchmark annotation formats, report serialization and the binary
// embedding/mask container.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lanekit/geometry.hpp"
#include "lanekit/losses.hpp"
#include "lanekit/metrics.hpp"

namespace lanekit {

// ---------------------------------------------------------------------------
// TuSimple: one JSON object per line with "lanes", "h_samples", "raw_file".

struct TuSimpleRecord {
  std::string raw_file;
  /// Prediction files usually omit h_samples; lengths are then validated
  /// when the record is paired with its ground truth.
  std::optional<std::vector<double>> h_samples;
  std::vector<SampledLane> lanes;
  std::optional<double> run_time;
  friend bool operator==(const TuSimpleRecord&, const TuSimpleRecord&) = default;
};

/// Streaming reader; blank lines are skipped.
class TuSimpleReader {
 public:
  TuSimpleReader(std::istream& in, std::string source);
  std::optional<TuSimpleRecord> next();

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

std::vector<TuSimpleRecord> parse_tusimple(std::istream& in, const std::string& source = "<stream>");
std::vector<TuSimpleRecord> read_tusimple_file(const std::filesystem::path& path);

/// Integral values are written as JSON integers, everything else in shortest
/// round-trip form.
std::string format_tusimple_record(const TuSimpleRecord& record);
void write_tusimple(std::ostream& out, const std::vector<TuSimpleRecord>& records);

/// Joins predictions to ground truth by raw_file. Throws when a GT frame has
/// no prediction or a lane length disagrees with the GT h_samples.
std::vector<TuSimpleFrame> pair_tusimple(const std::vector<TuSimpleRecord>& gt,
                                         const std::vector<TuSimpleRecord>& pred);

// ---------------------------------------------------------------------------
// CULane: one lane per line as whitespace-separated "x y" pairs.

std::vector<LanePolyline> parse_culane_lines(std::istream& in, const std::string& source = "<stream>");
std::vector<LanePolyline> read_culane_lines_file(const std::filesystem::path& path);
void write_culane_lines(std::ostream& out, const std::vector<LanePolyline>& lanes);
void write_culane_lines_file(const std::filesystem::path& path, const std::vector<LanePolyline>& lanes);

/// Path-prefix -> category rules; the longest matching prefix wins and frames
/// matching no rule are Normal.
class CategoryMap {
 public:
  CategoryMap() = default;
  void add(std::string prefix, Category category);
  Category lookup(const std::string& frame_id) const;
  const std::vector<std::pair<std::string, Category>>& rules() const { return rules_; }

 private:
  std::vector<std::pair<std::string, Category>> rules_;
};

/// Lines of "<prefix> <category>"; '#' starts a comment.
CategoryMap read_category_map(const std::filesystem::path& path);
void write_category_map(const std::filesystem::path& path, const CategoryMap& map);

struct ManifestEntry {
  std::string frame_id;
  /// Relative path of the frame's .lines.txt under an annotation root.
  std::string annotation;
  Category category = Category::kNormal;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
};

/// "frame.jpg" -> "frame.lines.txt"; a leading '/' is dropped.
std::string culane_annotation_path(const std::string& frame_id);

/// One frame path per line (extra tokens ignored). Frame ids must be unique.
DatasetManifest read_culane_list(const std::filesystem::path& list_path, const CategoryMap& categories = {});

// ---------------------------------------------------------------------------
// Reports: human-readable table plus versioned JSON.

inline constexpr int kReportSchema = 1;

std::string render_table(const EvalReport& report, const std::string& name = "prediction");
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Writes <prefix>.txt and <prefix>.json.
void write_report(const EvalReport& report, const std::filesystem::path& prefix,
                  const std::string& name = "prediction");

// ---------------------------------------------------------------------------
// Tensor container: magic "LKT1", little-endian uint32 H, W, D, then H*W*D
// little-endian float32 values, row-major with D fastest.

inline constexpr char kTensorMagic[4] = {'L', 'K', 'T', '1'};

void write_embedding_file(const std::filesystem::path& path, const EmbeddingField& field);
EmbeddingField read_embedding_file(const std::filesystem::path& path);
/// Masks use D = 1 with 0/1 values; any nonzero value reads as set.
void write_mask_file(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask_file(const std::filesystem::path& path);

/// Text instance map: header "H W L", then H rows of W labels.
void write_instance_map(std::ostream& out, const InstanceMap& map);
InstanceMap read_instance_map(std::istream& in, const std::string& source = "<stream>");

}  // namespace lanekit
