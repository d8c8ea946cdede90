#include "radtrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "radtrack/error.hpp"

namespace radtrack::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum Channel : std::uint32_t {
  kDropout = 1,
  kCenterNoise,
  kDepthNoise,
  kVelocityNoise,
  kDisplacementNoise,
  kConfidence,
  kRadarObject,
  kRadarClutter,
};

struct ObjectState {
  VehiclePoint center;
  std::optional<ImagePoint> projection;  // unbounded projection of the center
  std::optional<BoundingBox> box;
  bool visible = false;
};

ObjectState object_at(const ObjectSpec& o, double t, const CameraModel& cam) {
  ObjectState s;
  s.center = {o.initial.x + o.vx * t, o.initial.y + o.vy * t, o.initial.z};
  s.projection = project_unbounded(s.center, cam);
  s.visible = project_to_image(s.center, cam).has_value();
  BoundingBox b{1e300, 1e300, -1e300, -1e300};
  bool ok = true;
  for (double dx : {-0.5 * o.size_x, 0.5 * o.size_x})
    for (double dy : {-0.5 * o.size_y, 0.5 * o.size_y})
      for (double dz : {-0.5 * o.size_z, 0.5 * o.size_z}) {
        const auto ip = project_unbounded({s.center.x + dx, s.center.y + dy, s.center.z + dz}, cam);
        if (!ip) {
          ok = false;
          continue;
        }
        b.u_min = std::min(b.u_min, ip->u);
        b.v_min = std::min(b.v_min, ip->v);
        b.u_max = std::max(b.u_max, ip->u);
        b.v_max = std::max(b.v_max, ip->v);
      }
  if (ok) s.box = b;
  return s;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::stream(std::uint64_t seed, std::int64_t frame, std::uint32_t channel) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(frame));
  h = splitmix64(h ^ channel);
  return Rng(h);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void ScenarioConfig::validate() const {
  camera.validate();
  if (num_frames < 0) throw ConfigError("num_frames must be non-negative");
  if (!(frame_dt > 0.0)) throw ConfigError("frame_dt must be positive");
  if (!(noise.center_px >= 0.0 && noise.depth_m >= 0.0 && noise.velocity_mps >= 0.0 &&
        noise.displacement_px >= 0.0))
    throw ConfigError("noise sigmas must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (radar.points_per_object < 0 || radar.clutter_per_frame < 0)
    throw ConfigError("radar point counts must be non-negative");
  if (!(radar.position_sigma >= 0.0 && radar.velocity_sigma >= 0.0))
    throw ConfigError("radar sigmas must be non-negative");
  if (!(radar.clutter_min_depth > 0.0 && radar.clutter_max_depth > radar.clutter_min_depth))
    throw ConfigError("radar clutter depth range must be positive and non-empty");
  if (!(occlusion.iou_threshold > 0.0 && occlusion.iou_threshold <= 1.0))
    throw ConfigError("occlusion IoU threshold must lie in (0, 1]");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (!(o.size_x > 0.0 && o.size_y > 0.0 && o.size_z > 0.0))
      throw ConfigError("object " + std::to_string(i) + " has a non-positive size");
    if (!project_unbounded(o.initial, camera))
      throw ConfigError("object " + std::to_string(i) + " starts behind the camera");
  }
}

Scene generate(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto& cam = cfg.camera;
  Scene scene;
  scene.frames.reserve(static_cast<std::size_t>(cfg.num_frames));

  for (int f = 0; f < cfg.num_frames; ++f) {
    const double t = f * cfg.frame_dt;
    SceneFrame frame;
    frame.gt.frame_index = f;
    frame.gt.timestamp = t;
    frame.input.frame_index = f;
    frame.input.timestamp = t;

    std::vector<ObjectState> cur;
    std::vector<ObjectState> prev;
    cur.reserve(cfg.objects.size());
    for (const auto& o : cfg.objects) {
      cur.push_back(object_at(o, t, cam));
      prev.push_back(object_at(o, t - cfg.frame_dt, cam));
    }

    std::vector<std::size_t> visible;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (!cur[i].visible || !cur[i].box) continue;
      visible.push_back(i);
      const auto id = static_cast<std::int64_t>(i + 1);
      frame.gt.objects.push_back({id, cur[i].center.x, cur[i].center.y, cfg.objects[i].cls});
      frame.gt_boxes.push_back(*cur[i].box);
    }

    std::vector<bool> occluded(cur.size(), false);
    if (cfg.occlusion.enabled) {
      for (std::size_t a = 0; a < visible.size(); ++a)
        for (std::size_t b = a + 1; b < visible.size(); ++b) {
          const auto ia = visible[a];
          const auto ib = visible[b];
          if (iou(*cur[ia].box, *cur[ib].box) <= cfg.occlusion.iou_threshold) continue;
          // Farther object is hidden; equal depth hides the later one.
          const bool a_farther = cur[ia].projection->depth > cur[ib].projection->depth;
          occluded[a_farther ? ia : ib] = true;
        }
    }

    Rng drop = Rng::stream(cfg.seed, f, kDropout);
    Rng center_n = Rng::stream(cfg.seed, f, kCenterNoise);
    Rng depth_n = Rng::stream(cfg.seed, f, kDepthNoise);
    Rng vel_n = Rng::stream(cfg.seed, f, kVelocityNoise);
    Rng disp_n = Rng::stream(cfg.seed, f, kDisplacementNoise);
    Rng conf_r = Rng::stream(cfg.seed, f, kConfidence);
    for (std::size_t i : visible) {
      // Every draw happens for every visible object so streams stay aligned
      // regardless of which detections survive.
      const bool dropped = drop.uniform() < cfg.dropout;
      const double nu = center_n.normal() * cfg.noise.center_px;
      const double nv = center_n.normal() * cfg.noise.center_px;
      const double nd = depth_n.normal() * cfg.noise.depth_m;
      const double nvx = vel_n.normal() * cfg.noise.velocity_mps;
      const double nvy = vel_n.normal() * cfg.noise.velocity_mps;
      const double ndu = disp_n.normal() * cfg.noise.displacement_px;
      const double ndv = disp_n.normal() * cfg.noise.displacement_px;
      const double conf = conf_r.uniform(0.5, 1.0);
      if (dropped || occluded[i]) continue;

      const auto& o = cfg.objects[i];
      const auto& p = *cur[i].projection;
      Detection d;
      d.center = {p.u + nu, p.v + nv};
      d.depth = std::max(0.1, p.depth + nd);
      d.vx = o.vx + nvx;
      d.vy = o.vy + nvy;
      d.cls = o.cls;
      d.confidence = conf;
      if (f > 0 && prev[i].projection) {
        d.displacement = {p.u - prev[i].projection->u + ndu, p.v - prev[i].projection->v + ndv};
      }
      BoundingBox b = *cur[i].box;
      b.u_min += nu;
      b.u_max += nu;
      b.v_min += nv;
      b.v_max += nv;
      d.bbox = b;
      frame.input.detections.push_back(d);
      frame.provenance.push_back(static_cast<std::int64_t>(i + 1));
    }

    Rng radar_obj = Rng::stream(cfg.seed, f, kRadarObject);
    for (std::size_t i : visible) {
      const auto& o = cfg.objects[i];
      for (int k = 0; k < cfg.radar.points_per_object; ++k) {
        RadarPoint r;
        r.position = {cur[i].center.x + radar_obj.normal() * cfg.radar.position_sigma,
                      cur[i].center.y + radar_obj.normal() * cfg.radar.position_sigma,
                      cur[i].center.z - 0.5 * o.size_z};
        r.vx = o.vx + radar_obj.normal() * cfg.radar.velocity_sigma;
        r.vy = o.vy + radar_obj.normal() * cfg.radar.velocity_sigma;
        frame.input.radar.push_back(r);
      }
    }
    Rng clutter = Rng::stream(cfg.seed, f, kRadarClutter);
    for (int k = 0; k < cfg.radar.clutter_per_frame; ++k) {
      const double u = clutter.uniform(0.0, cam.image_width);
      const double depth = clutter.uniform(cfg.radar.clutter_min_depth, cfg.radar.clutter_max_depth);
      RadarPoint r;
      r.position = backproject_at_depth({u, cam.cy}, depth, cam);
      r.vx = clutter.normal() * cfg.radar.velocity_sigma;
      r.vy = clutter.normal() * cfg.radar.velocity_sigma;
      frame.input.radar.push_back(r);
    }

    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

NoiseSpec standard_noise() { return {2.0, 0.5, 0.3, 2.0}; }

RadarSpec standard_radar() {
  RadarSpec r;
  r.points_per_object = 3;
  r.position_sigma = 0.25;
  r.velocity_sigma = 0.2;
  r.clutter_per_frame = 5;
  return r;
}

ScenarioConfig crossing_scenario(double depth_gap, std::uint64_t seed) {
  if (!(depth_gap >= 0.0) || !std::isfinite(depth_gap))
    throw ConfigError("depth gap must be non-negative");
  constexpr double kNearDepth = 20.0;
  constexpr double kLateralSpeed = 3.0;

  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.num_frames = 40;
  cfg.frame_dt = 0.1;
  cfg.camera = CameraModel::standard();
  cfg.noise = standard_noise();
  cfg.dropout = kStandardDropout;
  cfg.radar = standard_radar();

  const double mount_z = cfg.camera.center().z();
  const double t_cross = kCrossingFrame * cfg.frame_dt;
  const double scale = (kNearDepth + depth_gap) / kNearDepth;

  ObjectSpec near;
  near.cls = 0;
  near.vy = -kLateralSpeed;  // moves right in the image
  near.initial = {kNearDepth, -near.vy * t_cross, mount_z};
  near.size_x = 2.0;
  near.size_y = 2.0;
  near.size_z = 1.6;

  ObjectSpec far = near;
  far.vy = kLateralSpeed;
  far.initial = {kNearDepth + depth_gap, -far.vy * t_cross, mount_z};
  far.size_x *= scale;
  far.size_y *= scale;
  far.size_z *= scale;

  cfg.objects = {near, far};
  return cfg;
}

ScenarioConfig noiseless(ScenarioConfig cfg) {
  cfg.noise = {};
  cfg.dropout = 0.0;
  cfg.radar.position_sigma = 0.0;
  cfg.radar.velocity_sigma = 0.0;
  cfg.radar.clutter_per_frame = 0;
  return cfg;
}

Heatmap ground_truth_heatmap(const SceneFrame& frame, const HeatmapConfig& cfg) {
  cfg.validate();
  std::vector<GaussianCenter> centers;
  for (std::size_t i = 0; i < frame.gt.objects.size(); ++i) {
    const auto& o = frame.gt.objects[i];
    if (o.cls < 0 || o.cls >= cfg.num_classes) continue;
    const auto& b = frame.gt_boxes[i];
    const Pixel c = b.center();
    const int col = std::clamp(static_cast<int>(std::floor(c.u / cfg.downsample)), 0, cfg.grid_width() - 1);
    const int row = std::clamp(static_cast<int>(std::floor(c.v / cfg.downsample)), 0, cfg.grid_height() - 1);
    const double diag = std::hypot(b.u_max - b.u_min, b.v_max - b.v_min) / cfg.downsample;
    centers.push_back({{col, row}, o.cls, std::max(1.0, diag / 6.0)});
  }
  return render_gaussian(centers, cfg);
}

}  // namespace radtrack::sim
