#include "doctest.h"
#include "lanekit/clustering.hpp"
#include "lanekit/metrics.hpp"
#include "lanekit/synth.hpp"

using namespace lanekit;

TEST_SUITE("synth") {

TEST_CASE("same seed, same scene") {
  SceneSpec spec;
  spec.grid = ImageGrid(320, 120);
  spec.lane_width = 6.0;
  spec.jitter = 2.0;
  spec.seed = 77;
  const Scene a = generate_scene(spec);
  const Scene b = generate_scene(spec);
  CHECK(a.lanes.gt == b.lanes.gt);
  CHECK(a.lanes.pred == b.lanes.pred);
  CHECK(a.field == b.field);
  CHECK(a.instances == b.instances);
  spec.seed = 78;
  CHECK_FALSE(generate_scene(spec).lanes.pred == a.lanes.pred);
}

TEST_CASE("generated fields cluster exactly") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SceneSpec spec;
    spec.grid = ImageGrid(200, 80);
    spec.lane_width = 5.0;
    spec.lane_count = 1 + static_cast<int>(seed % 6);
    spec.seed = seed;
    const Scene s = generate_scene(spec);
    ClusterConfig cfg = ClusterConfig::from_margins(LossParams(spec.delta_v, spec.delta_d));
    cfg.seed = seed;
    const ClusteringResult r = threshold_cluster(s.field, s.mask, cfg);
    CHECK(r.lane_count == static_cast<std::uint32_t>(spec.lane_count));
    CHECK(partition_agreement(r.instances, s.instances) == 1.0);
    CHECK(clustering_loss(s.field, ClusterAssignment::from_instances(s.instances),
                          LossParams(spec.delta_v, spec.delta_d)).value == 0.0);
  }
}

TEST_CASE("instances match the rasterized ground truth") {
  SceneSpec spec;
  spec.grid = ImageGrid(400, 150);
  spec.lane_width = 8.0;
  const Scene s = generate_scene(spec);
  const LaneTargets t = targets_from_lanes(s.lanes.gt, spec.lane_width, spec.grid);
  CHECK(t.instances == s.instances);
  CHECK(t.mask == s.mask);
  CHECK(instance_count(s.instances) == 4);
}

TEST_CASE("lanes span the image height and do not touch") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.lane_count = 1 + static_cast<int>(seed % 8);
    const LaneScene s = generate_lanes(spec);
    REQUIRE(s.gt.size() == static_cast<std::size_t>(spec.lane_count));
    for (const auto& lane : s.gt) {
      CHECK(lane.points.front().y == 0.0);
      CHECK(lane.points.back().y == spec.grid.height() - 1.0);
      for (const auto& p : lane.points) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= spec.grid.width() - 1.0);
      }
    }
    for (std::size_t k = 1; k < s.gt.size(); ++k) {
      for (std::size_t i = 0; i < s.h_samples.size(); ++i) {
        CHECK(s.gt[k].points[i].x - s.gt[k - 1].points[i].x > spec.lane_width);
      }
    }
  }
}

TEST_CASE("clean predictions self-evaluate perfectly") {
  SceneSpec spec;
  spec.drop_probability = 0.0;
  spec.add_probability = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const LaneScene s = generate_lanes(spec);
    CHECK(s.pred == s.gt);
    const CulaneFrame f{spec.grid, Category::kNormal, s.gt, s.pred};
    CHECK(culane_f1(std::span(&f, 1)).totals.f1() == 1.0);
  }
}

TEST_CASE("drop and add bookkeeping") {
  SceneSpec spec;
  spec.drop_probability = 1.0;
  spec.add_probability = 0.0;
  const LaneScene dropped = generate_lanes(spec);
  CHECK(dropped.dropped_lane >= 0);
  CHECK(dropped.pred.size() == 3);
  CHECK_FALSE(dropped.spurious_added);
  spec.drop_probability = 0.0;
  spec.add_probability = 1.0;
  const LaneScene added = generate_lanes(spec);
  CHECK(added.dropped_lane == -1);
  CHECK(added.spurious_added);
  CHECK(added.pred.size() == 5);
}

TEST_CASE("infeasible specs are rejected") {
  SceneSpec spec;
  spec.lane_count = 8;
  spec.lane_width = 200.0;
  CHECK_THROWS_AS(validate_scene_spec(spec), InvalidArgument);
  spec = SceneSpec{};
  spec.delta_d = 2.0;
  CHECK_THROWS_AS(validate_scene_spec(spec), InvalidArgument);
  spec = SceneSpec{};
  spec.lane_count = 0;
  CHECK_THROWS_AS(generate_lanes(spec), InvalidArgument);
  spec = SceneSpec{};
  spec.jitter = -1.0;
  CHECK_THROWS_AS(generate_scene(spec), InvalidArgument);
  spec = SceneSpec{};
  spec.curvature = 2.0;
  CHECK_THROWS_AS(validate_scene_spec(spec), InvalidArgument);
}

}
