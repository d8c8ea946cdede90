#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "radtrack/fusion.hpp"
#include "radtrack/geometry.hpp"
#include "radtrack/heatmap.hpp"
#include "radtrack/metrics.hpp"
#include "radtrack/tracker.hpp"

namespace radtrack::sim {

/// Portable generator: mt19937_64 core with hand-written uniform/normal
/// transforms, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent stream for a (sequence seed, frame, channel) triple.
  static Rng stream(std::uint64_t seed, std::int64_t frame, std::uint32_t channel);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct ObjectSpec {
  int cls = 0;
  VehiclePoint initial;  // box center at frame 0
  double vx = 0.0;
  double vy = 0.0;
  double size_x = 4.5;
  double size_y = 1.8;
  double size_z = 1.6;
};

struct NoiseSpec {
  double center_px = 0.0;
  double depth_m = 0.0;
  double velocity_mps = 0.0;
  double displacement_px = 0.0;
};

struct RadarSpec {
  int points_per_object = 3;
  double position_sigma = 0.0;
  double velocity_sigma = 0.0;
  int clutter_per_frame = 0;
  double clutter_min_depth = 5.0;
  double clutter_max_depth = 60.0;
};

struct OcclusionSpec {
  bool enabled = true;
  double iou_threshold = 0.7;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  int num_frames = 40;
  double frame_dt = 0.1;
  CameraModel camera = CameraModel::standard();
  std::vector<ObjectSpec> objects;
  NoiseSpec noise;
  double dropout = 0.0;
  RadarSpec radar;
  OcclusionSpec occlusion;

  /// Throws ConfigError; includes objects starting behind the camera.
  void validate() const;
};

struct SceneFrame {
  metrics::GroundTruthFrame gt;
  FrameInput input;
  /// Ground-truth id behind each detection in `input.detections`.
  std::vector<std::int64_t> provenance;
  /// Noise-free projected box of each ground-truth object, same order as gt.objects.
  std::vector<BoundingBox> gt_boxes;
};

struct Scene {
  std::vector<SceneFrame> frames;
};

/// Constant-velocity scene with noisy detections, displacement, radar returns
/// and IoU-based occlusion. Same config, same scene, bit for bit.
Scene generate(const ScenarioConfig& cfg);

NoiseSpec standard_noise();
RadarSpec standard_radar();
inline constexpr double kStandardDropout = 0.02;

/// Frame at which the two crossing objects coincide in the image.
inline constexpr int kCrossingFrame = 20;

/// Two same-class objects with opposite lateral velocities whose image
/// centers coincide at kCrossingFrame, separated in depth by `depth_gap`.
/// The farther object is scaled so both project to the same box at the
/// crossing. Standard noise, dropout and radar. depth_gap == 0 is the
/// adversarial control case.
ScenarioConfig crossing_scenario(double depth_gap, std::uint64_t seed);

/// Same layout with every noise source, dropout and clutter disabled.
ScenarioConfig noiseless(ScenarioConfig cfg);

/// Ground-truth center heatmap of one frame; sigma = max(1, box diagonal / 6) in grid cells.
Heatmap ground_truth_heatmap(const SceneFrame& frame, const HeatmapConfig& cfg);

}  // namespace radtrack::sim
