#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lanekit/cli.hpp"
#include "lanekit/clustering.hpp"
#include "lanekit/gradcheck.hpp"
#include "lanekit/synth.hpp"

namespace lanekit {

namespace {

namespace fs = std::filesystem;

constexpr double kDefaultDeltaV = 0.5;
constexpr double kDefaultDeltaD = 3.1;

struct TuSimpleArgs {
  std::string gt;
  std::string pred;
  double x_tolerance = 20.0;
  double match_fraction = 0.85;
  std::string out = "tusimple_report";
  std::string name = "prediction";
};

struct CulaneArgs {
  std::string list;
  std::string gt_root;
  std::string pred_root;
  double width = kCulaneLaneWidth;
  double iou = 0.5;
  std::size_t threads = 1;
  bool strict = false;
  std::string categories;
  int image_width = 1640;
  int image_height = 590;
  std::string out = "culane_report";
  std::string name = "prediction";
};

struct ClusterArgs {
  std::string embedding;
  std::string mask;
  double delta_v = kDefaultDeltaV;
  double delta_d = kDefaultDeltaD;
  double radius = 0.0;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::size_t min_pixels = 0;
  std::string out = "instances.txt";
};

struct SynthArgs {
  std::string out;
  int lanes = 4;
  std::size_t frames = 50;
  std::uint64_t seed = 0;
  int image_width = 1640;
  int image_height = 590;
  double width = kCulaneLaneWidth;
  double jitter = 0.0;
  double curvature = 0.1;
  int samples = 30;
  double drop_prob = 0.1;
  double add_prob = 0.1;
  std::string format = "both";
  std::size_t embedding_dim = 4;
  double delta_v = kDefaultDeltaV;
  double delta_d = kDefaultDeltaD;
  std::size_t embedding_frames = 1;
  bool categories = false;
};

int cmd_eval_tusimple(const TuSimpleArgs& a, std::ostream& out) {
  const std::vector<TuSimpleRecord> gt = read_tusimple_file(a.gt);
  const std::vector<TuSimpleRecord> pred = read_tusimple_file(a.pred);
  const std::vector<TuSimpleFrame> frames = pair_tusimple(gt, pred);
  const EvalReport report = tusimple_accuracy(frames, {a.x_tolerance, a.match_fraction});
  write_report(report, a.out, a.name);
  out << render_table(report, a.name);
  return kExitOk;
}

std::size_t threads_from_env(std::size_t fallback) {
  const char* value = std::getenv("LANEKIT_THREADS");
  if (value == nullptr || *value == '\0') return fallback;
  std::size_t threads = 0;
  const char* end = value + std::strlen(value);
  const auto [ptr, ec] = std::from_chars(value, end, threads);
  if (ec != std::errc{} || ptr != end || threads == 0) {
    throw InvalidArgument(std::string("LANEKIT_THREADS must be a positive integer, got '") + value + "'");
  }
  return threads;
}

int cmd_eval_culane(const CulaneArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.width >= 1.0)) throw InvalidArgument("--width must be >= 1");
  if (!(a.iou > 0.0 && a.iou <= 1.0)) throw InvalidArgument("--iou must be in (0, 1]");
  const CategoryMap categories = a.categories.empty() ? CategoryMap{} : read_category_map(a.categories);
  const DatasetManifest manifest = read_culane_list(a.list, categories);
  CulaneCorpusOptions options;
  options.metric = {a.width, a.iou};
  options.grid = ImageGrid(a.image_width, a.image_height);
  options.threads = a.threads;
  options.strict = a.strict;
  const EvalReport report = evaluate_culane_corpus(manifest, a.gt_root, a.pred_root, options, err);
  write_report(report, a.out, a.name);
  out << render_table(report, a.name);
  return kExitOk;
}

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
  const EmbeddingField field = read_embedding_file(a.embedding);
  const BinaryMask mask = read_mask_file(a.mask);
  if (!(field.grid() == mask.grid())) {
    throw InvalidArgument("embedding grid " + std::to_string(field.grid().width()) + "x" +
                          std::to_string(field.grid().height()) + " does not match mask grid " +
                          std::to_string(mask.grid().width()) + "x" + std::to_string(mask.grid().height()));
  }
  ClusterConfig config = ClusterConfig::from_margins(LossParams(a.delta_v, a.delta_d));
  if (a.radius > 0.0) config.radius = a.radius;
  config.seed = a.seed;
  config.deterministic = a.deterministic;
  config.min_pixels = a.min_pixels;
  const ClusteringResult result = threshold_cluster(field, mask, config);

  const fs::path path(a.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write " + a.out);
  write_instance_map(file, result.instances);
  if (!file.flush()) throw Error("cannot write " + a.out);
  out << "instances " << result.lane_count << '\n';
  return kExitOk;
}

int cmd_grad_check(const GradCheckOptions& options, std::ostream& out, std::ostream& err) {
  constexpr double kTolerance = 1e-6;
  std::vector<GradCheckResult> results;
  try {
    results = run_gradient_checks(options);
  } catch (const InvalidArgument&) {
    throw;
  } catch (const Error& e) {
    err << "grad-check failed: " << e.what() << '\n';
    return kExitFailure;
  }
  bool ok = true;
  for (const GradCheckResult& r : results) {
    const bool pass = r.max_relative_error <= kTolerance;
    ok = ok && pass;
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s max relative error %.3e (seed %llu) %s\n", r.loss.c_str(),
                  r.max_relative_error, static_cast<unsigned long long>(r.worst_seed), pass ? "ok" : "FAIL");
    out << line;
  }
  return ok ? kExitOk : kExitFailure;
}

std::string frame_dir(Category c, bool by_category) {
  if (!by_category) return "frames";
  std::string dir;
  for (char ch : category_name(c)) dir.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  return dir;
}

SampledLane sample_for_tusimple(const LanePolyline& lane) {
  SampledLane xs;
  xs.reserve(lane.points.size());
  for (const Point2& p : lane.points) xs.push_back(std::round(p.x));
  return xs;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.format != "both" && a.format != "tusimple" && a.format != "culane") {
    throw InvalidArgument("--format must be tusimple, culane or both");
  }
  SceneSpec spec;
  spec.grid = ImageGrid(a.image_width, a.image_height);
  spec.lane_count = a.lanes;
  spec.curvature = a.curvature;
  spec.jitter = a.jitter;
  spec.embedding_dim = a.embedding_dim;
  spec.delta_v = a.delta_v;
  spec.delta_d = a.delta_d;
  spec.lane_width = a.width;
  spec.samples = a.samples;
  spec.drop_probability = a.drop_prob;
  spec.add_probability = a.add_prob;
  validate_scene_spec(spec);

  const fs::path root(a.out);
  const bool tusimple = a.format != "culane";
  const bool culane = a.format != "tusimple";
  std::vector<TuSimpleRecord> ts_gt;
  std::vector<TuSimpleRecord> ts_pred;
  std::ostringstream list;
  std::size_t dropped = 0;
  std::size_t added = 0;
  std::size_t gt_lanes = 0;
  std::size_t pred_lanes = 0;

  for (std::size_t i = 0; i < a.frames; ++i) {
    SceneSpec frame_spec = spec;
    frame_spec.seed = a.seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    const Category category = a.categories ? kAllCategories[i % kAllCategories.size()] : Category::kNormal;
    LaneScene scene = generate_lanes(frame_spec);
    if (category == Category::kCrossroad) {
      scene.gt.clear();
      std::vector<LanePolyline> spurious;
      if (scene.spurious_added) spurious.push_back(scene.pred.back());
      scene.pred = std::move(spurious);
      scene.dropped_lane = -1;
    }
    dropped += scene.dropped_lane >= 0 ? 1 : 0;
    added += scene.spurious_added ? 1 : 0;
    gt_lanes += scene.gt.size();
    pred_lanes += scene.pred.size();

    char stem[32];
    std::snprintf(stem, sizeof(stem), "%05zu", i);
    const std::string id = frame_dir(category, a.categories) + "/" + stem + ".jpg";
    if (culane) {
      list << id << '\n';
      write_culane_lines_file(root / "culane" / "gt" / culane_annotation_path(id), scene.gt);
      write_culane_lines_file(root / "culane" / "pred" / culane_annotation_path(id), scene.pred);
    }
    if (tusimple && category != Category::kCrossroad) {
      TuSimpleRecord g{"clips/" + id, scene.h_samples, {}, std::nullopt};
      for (const LanePolyline& lane : scene.gt) g.lanes.push_back(sample_for_tusimple(lane));
      TuSimpleRecord p{"clips/" + id, scene.h_samples, {}, std::nullopt};
      for (const LanePolyline& lane : scene.pred) p.lanes.push_back(sample_for_tusimple(lane));
      ts_gt.push_back(std::move(g));
      ts_pred.push_back(std::move(p));
    }
    if (i < a.embedding_frames) {
      const Scene full = generate_scene(frame_spec);
      const fs::path base = root / "embeddings" / stem;
      write_embedding_file(base.string() + ".emb", full.field);
      write_mask_file(base.string() + ".mask", full.mask);
      std::ofstream inst(base.string() + ".instances.txt", std::ios::binary);
      write_instance_map(inst, full.instances);
    }
  }

  const auto write_text = [](const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!file || !(file << text) || !file.flush()) throw Error("cannot write " + path.string());
  };
  if (culane) {
    write_text(root / "culane" / "list.txt", list.str());
    if (a.categories) {
      CategoryMap map;
      for (Category c : kAllCategories) map.add(frame_dir(c, true) + "/", c);
      write_category_map(root / "culane" / "categories.txt", map);
    }
  }
  if (tusimple) {
    std::ostringstream g;
    write_tusimple(g, ts_gt);
    write_text(root / "tusimple" / "gt.json", g.str());
    std::ostringstream p;
    write_tusimple(p, ts_pred);
    write_text(root / "tusimple" / "pred.json", p.str());
  }
  nlohmann::ordered_json summary;
  summary["frames"] = a.frames;
  summary["lanes_per_frame"] = a.lanes;
  summary["seed"] = a.seed;
  summary["dropped_lanes"] = dropped;
  summary["spurious_lanes"] = added;
  summary["gt_lanes"] = gt_lanes;
  summary["pred_lanes"] = pred_lanes;
  summary["embedding_frames"] = std::min(a.embedding_frames, a.frames);
  write_text(root / "summary.json", summary.dump(2) + '\n');

  out << "wrote " << a.frames << " frames to " << root.string() << '\n';
  return kExitOk;
}

// Last CLI11 subcommand callback result.
struct Dispatch {
  std::function<int()> run;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lanekit: lane-instance clustering, losses and benchmark metrics"};
  app.name("lanekit");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Dispatch dispatch;

  TuSimpleArgs ts;
  auto* eval_ts = app.add_subcommand("eval-tusimple", "TuSimple accuracy with lane FP/FN rates");
  eval_ts->add_option("gt", ts.gt, "ground-truth JSON-lines file")->required();
  eval_ts->add_option("pred", ts.pred, "prediction JSON-lines file")->required();
  eval_ts->add_option("--x-tol", ts.x_tolerance, "max |x_pred - x_gt| for a correct point (pixels)");
  eval_ts->add_option("--match-fraction", ts.match_fraction, "fraction of a lane's points needed to match it");
  eval_ts->add_option("--out", ts.out, "report path prefix (.txt and .json)");
  eval_ts->add_option("--name", ts.name, "algorithm name shown in the table");
  eval_ts->callback([&] { dispatch.run = [&] { return cmd_eval_tusimple(ts, out); }; });

  CulaneArgs cu;
  auto* eval_cu = app.add_subcommand("eval-culane", "CULane/BDD100K IoU-matched F1 per category");
  eval_cu->add_option("list", cu.list, "frame list file, one relative image path per line")->required();
  eval_cu->add_option("gt_root", cu.gt_root, "ground-truth annotation root")->required();
  eval_cu->add_option("pred_root", cu.pred_root, "prediction annotation root")->required();
  eval_cu->add_option("--width", cu.width, "lane stroke width in pixels (30 CULane, 8 BDD100K)");
  eval_cu->add_option("--iou", cu.iou, "IoU a match must exceed");
  auto* threads_opt = eval_cu->add_option("--threads", cu.threads, "worker threads; LANEKIT_THREADS when omitted")
                          ->check(CLI::PositiveNumber);
  eval_cu->add_flag("--strict", cu.strict, "treat missing prediction files as errors");
  eval_cu->add_option("--categories", cu.categories, "path-prefix -> category mapping file");
  eval_cu->add_option("--image-width", cu.image_width, "annotation image width");
  eval_cu->add_option("--image-height", cu.image_height, "annotation image height");
  eval_cu->add_option("--out", cu.out, "report path prefix (.txt and .json)");
  eval_cu->add_option("--name", cu.name, "algorithm name shown in the table");
  eval_cu->callback([&] {
    dispatch.run = [&] {
      if (threads_opt->count() == 0) cu.threads = threads_from_env(cu.threads);
      return cmd_eval_culane(cu, out, err);
    };
  });

  ClusterArgs cl;
  auto* cluster = app.add_subcommand("cluster", "threshold clustering of lane-pixel embeddings");
  cluster->add_option("embedding", cl.embedding, "embedding tensor file")->required();
  cluster->add_option("mask", cl.mask, "binary mask tensor file")->required();
  cluster->add_option("--delta-v", cl.delta_v, "pull margin; radius defaults to 2 * delta_v");
  cluster->add_option("--delta-d", cl.delta_d, "push margin (must exceed 6 * delta_v)");
  cluster->add_option("--radius", cl.radius, "explicit clustering radius (0 = 2 * delta_v)");
  cluster->add_option("--seed", cl.seed, "seed for the starting-pixel order");
  cluster->add_flag("--deterministic", cl.deterministic, "seed pixels in row-major order");
  cluster->add_option("--min-pixels", cl.min_pixels, "drop instances smaller than this (0 keeps all)");
  cluster->add_option("--out", cl.out, "instance map output (text)");
  cluster->callback([&] { dispatch.run = [&] { return cmd_cluster(cl, out); }; });

  GradCheckOptions gc;
  auto* grad = app.add_subcommand("grad-check", "finite-difference check of every analytic gradient");
  grad->add_option("--seed", gc.seed, "first instance seed");
  grad->add_option("--trials", gc.trials, "random instances per loss")->check(CLI::PositiveNumber);
  grad->add_option("--step", gc.step, "central-difference step")->check(CLI::PositiveNumber);
  grad->add_flag("--corrupt-gradient", gc.corrupt_gradient, "negative control: perturb one gradient entry")
      ->group("");
  grad->callback([&] { dispatch.run = [&] { return cmd_grad_check(gc, out, err); }; });

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "write a synthetic scene corpus");
  synth->add_option("--out", sy.out, "output directory")->required();
  synth->add_option("--lanes", sy.lanes, "lanes per frame (1..8)");
  synth->add_option("--frames", sy.frames, "number of frames");
  synth->add_option("--seed", sy.seed, "base seed");
  synth->add_option("--image-width", sy.image_width, "image width");
  synth->add_option("--image-height", sy.image_height, "image height");
  synth->add_option("--width", sy.width, "lane stroke width for instance maps");
  synth->add_option("--jitter", sy.jitter, "prediction x noise std (pixels)");
  synth->add_option("--curvature", sy.curvature, "lane bend as a fraction of the width");
  synth->add_option("--samples", sy.samples, "points per lane");
  synth->add_option("--drop-prob", sy.drop_prob, "probability of dropping one predicted lane");
  synth->add_option("--add-prob", sy.add_prob, "probability of adding a spurious lane");
  synth->add_option("--format", sy.format, "tusimple, culane or both");
  synth->add_option("--embedding-dim", sy.embedding_dim, "embedding dimension");
  synth->add_option("--delta-v", sy.delta_v, "pull margin");
  synth->add_option("--delta-d", sy.delta_d, "push margin (must exceed 6 * delta_v)");
  synth->add_option("--embedding-frames", sy.embedding_frames, "frames that also get embedding/mask files");
  synth->add_flag("--categories", sy.categories, "spread frames over the nine CULane categories");
  synth->callback([&] { dispatch.run = [&] { return cmd_synth(sy, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return dispatch.run ? dispatch.run() : kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace lanekit
