#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "radtrack/error.hpp"
#include "radtrack/simulator.hpp"

namespace radtrack::sim {
namespace {

ScenarioConfig static_object() {
  ScenarioConfig cfg;
  cfg.num_frames = 10;
  cfg.objects.push_back({0, {20, 1, 1}, 0, 0, 4.5, 1.8, 1.6});
  return cfg;
}

TEST(Generate, StaticNoiselessObjectRepeatsExactly) {
  const Scene s = generate(static_object());
  ASSERT_EQ(s.frames.size(), 10u);
  const auto& d0 = s.frames[0].input.detections.at(0);
  for (const auto& f : s.frames) {
    ASSERT_EQ(f.input.detections.size(), 1u);
    const auto& d = f.input.detections[0];
    EXPECT_EQ(d.center, d0.center);
    EXPECT_EQ(d.depth, d0.depth);
    EXPECT_EQ(d.displacement, (PixelOffset{0, 0}));
  }
}

TEST(Generate, SameSeedSameScene) {
  const auto cfg = crossing_scenario(10, 42);
  const Scene a = generate(cfg), b = generate(cfg);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    EXPECT_EQ(a.frames[f].input.detections, b.frames[f].input.detections);
    EXPECT_EQ(a.frames[f].input.radar, b.frames[f].input.radar);
    EXPECT_EQ(a.frames[f].gt.objects.size(), b.frames[f].gt.objects.size());
  }
}

TEST(Generate, NoiselessDetectionsMatchProjection) {
  ScenarioConfig cfg;
  cfg.objects.push_back({0, {18, 5, 1}, 2.0, -3.0, 4.5, 1.8, 1.6});
  cfg.objects.push_back({4, {30, -4, 0.9}, -1.0, 1.0, 0.6, 0.6, 1.8});
  cfg.radar = standard_radar();
  cfg.noise = standard_noise();
  cfg.dropout = 0.3;
  cfg = noiseless(cfg);
  const Scene s = generate(cfg);
  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    const auto& frame = s.frames[f];
    ASSERT_EQ(frame.provenance.size(), frame.input.detections.size());
    for (std::size_t i = 0; i < frame.input.detections.size(); ++i) {
      const auto& d = frame.input.detections[i];
      const int obj = static_cast<int>(frame.provenance[i]) - 1;
      const auto& spec = cfg.objects[obj];
      const double t = 0.1 * f;
      const VehiclePoint p{spec.initial.x + spec.vx * t, spec.initial.y + spec.vy * t, spec.initial.z};
      const auto ip = project_unbounded(p, cfg.camera);
      EXPECT_NEAR(d.center.u, ip->u, 1e-9);
      EXPECT_NEAR(d.center.v, ip->v, 1e-9);
      EXPECT_NEAR(d.depth, ip->depth, 1e-9);
      EXPECT_EQ(d.vx, spec.vx);
      if (f > 0) {
        const VehiclePoint q{p.x - spec.vx * 0.1, p.y - spec.vy * 0.1, p.z};
        const auto prev = project_unbounded(q, cfg.camera);
        EXPECT_NEAR(d.gated_position().u, prev->u, 1e-9);
        EXPECT_NEAR(d.gated_position().v, prev->v, 1e-9);
      }
    }
    // Noise-free radar points sit at the object's depth within a pillar.
    for (const auto& r : frame.input.radar) {
      const auto ip = project_unbounded(r.position, cfg.camera);
      bool near = false;
      for (const auto& o : frame.gt.objects) {
        const auto oc = project_unbounded({o.x, o.y, 1.0}, cfg.camera);
        near |= std::abs(ip->depth - oc->depth) <= PillarDims{}.depth_x;
      }
      EXPECT_TRUE(near);
    }
  }
}

TEST(Crossing, CentersCoincideAtCrossingFrame) {
  const auto cfg = noiseless(crossing_scenario(10, 1));
  const Scene s = generate(cfg);
  const auto& boxes = s.frames[kCrossingFrame].gt_boxes;
  // The ground truth lists only visible objects, so take the projection directly.
  std::vector<Pixel> centers;
  for (const auto& o : cfg.objects) {
    const double t = 0.1 * kCrossingFrame;
    const auto ip = project_unbounded({o.initial.x + o.vx * t, o.initial.y + o.vy * t, o.initial.z}, cfg.camera);
    centers.push_back(ip->pixel());
  }
  EXPECT_LE(std::hypot(centers[0].u - centers[1].u, centers[0].v - centers[1].v), 2.0);
  EXPECT_FALSE(boxes.empty());
}

TEST(Crossing, ExactlyOneDetectionAtClosestApproach) {
  const Scene s = generate(noiseless(crossing_scenario(10, 1)));
  EXPECT_EQ(s.frames[kCrossingFrame].input.detections.size(), 1u);
  EXPECT_EQ(s.frames[kCrossingFrame].provenance.at(0), 1);  // the nearer object
  EXPECT_EQ(s.frames[0].input.detections.size(), 2u);
}

TEST(Crossing, SeedsChangeNoiseNotGroundTruth) {
  const Scene ref = generate(crossing_scenario(10, 0));
  std::set<double> first_u;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scene s = generate(crossing_scenario(10, seed));
    for (std::size_t f = 0; f < s.frames.size(); ++f) {
      ASSERT_EQ(s.frames[f].gt.objects.size(), ref.frames[f].gt.objects.size());
      for (std::size_t k = 0; k < s.frames[f].gt.objects.size(); ++k) {
        EXPECT_EQ(s.frames[f].gt.objects[k].x, ref.frames[f].gt.objects[k].x);
        EXPECT_EQ(s.frames[f].gt.objects[k].y, ref.frames[f].gt.objects[k].y);
      }
    }
    first_u.insert(s.frames[0].input.detections.at(0).center.u);
  }
  EXPECT_EQ(first_u.size(), 100u);
}

TEST(Crossing, ZeroGapIsValidNegativeRejected) {
  EXPECT_NO_THROW(crossing_scenario(0, 1).validate());
  EXPECT_NO_THROW(generate(crossing_scenario(0, 1)));
  EXPECT_THROW(crossing_scenario(-1, 1), ConfigError);
}

TEST(ScenarioConfig, Validation) {
  auto cfg = static_object();
  cfg.objects[0].initial.x = -3;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = static_object();
  cfg.dropout = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = static_object();
  cfg.frame_dt = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = static_object();
  cfg.noise.depth_m = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(123);
  double s = 0, s2 = 0, n = 0, n2 = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u, s2 += u * u;
    const double z = r.normal();
    n += z, n2 += z * z;
  }
  EXPECT_NEAR(s / N, 0.5, 0.005);
  EXPECT_NEAR(s2 / N - 0.25, 1.0 / 12, 0.005);
  EXPECT_NEAR(n / N, 0.0, 0.01);
  EXPECT_NEAR(n2 / N, 1.0, 0.02);
}

TEST(Rng, StreamsAreIndependentOfDrawOrder) {
  Rng a = Rng::stream(5, 3, 1);
  Rng b = Rng::stream(5, 3, 1);
  Rng c = Rng::stream(5, 3, 2);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng::stream(5, 3, 1).next(), c.next());
}

TEST(GroundTruthHeatmap, PeaksAtVisibleObjects) {
  const Scene s = generate(noiseless(crossing_scenario(10, 1)));
  const HeatmapConfig hc{800, 448, 4, 1};
  const Heatmap h = ground_truth_heatmap(s.frames[0], hc);
  EXPECT_EQ(extract_peaks(h, 0.99, 3).size(), s.frames[0].gt.objects.size());
}

}  // namespace
}  // namespace radtrack::sim
