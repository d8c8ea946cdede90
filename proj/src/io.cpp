#include "radtrack/io.hpp"

#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "radtrack/error.hpp"

namespace radtrack::io {

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object()) throw InputError("expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw InputError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

std::int64_t integer(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw InputError(std::string("key '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

json array_of(const json& j, const char* key) {
  if (!j.contains(key)) return json::array();
  const json& v = j.at(key);
  if (!v.is_array()) throw InputError(std::string("key '") + key + "' must be an array");
  return v;
}

json leftovers(const json& j, std::initializer_list<std::string_view> known) {
  json extra = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool is_known = false;
    for (auto k : known) is_known = is_known || it.key() == k;
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

void merge_extra(json& out, const json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it)
    if (!out.contains(it.key())) out[it.key()] = it.value();
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(std::istream& in, Parse parse) {
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

template <typename Record>
void write_lines(std::ostream& out, std::span<const Record> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open " + p.string());
  return in;
}

}  // namespace

FrameInput ReplayRecord::to_frame_input() const {
  FrameInput in;
  in.frame_index = frame_index;
  in.timestamp = timestamp;
  in.detections.reserve(detections.size());
  for (const auto& d : detections) in.detections.push_back(d.det);
  in.radar.reserve(radar.size());
  for (const auto& r : radar) in.radar.push_back(r.point);
  return in;
}

ReplayRecord ReplayRecord::from(const FrameInput& in) {
  ReplayRecord r;
  r.frame_index = in.frame_index;
  r.timestamp = in.timestamp;
  for (const auto& d : in.detections) r.detections.push_back({d, json::object()});
  for (const auto& p : in.radar) r.radar.push_back({p, json::object()});
  return r;
}

json to_json(const ReplayRecord& r) {
  json dets = json::array();
  for (const auto& rd : r.detections) {
    const Detection& d = rd.det;
    json o = {{"u", d.center.u},   {"v", d.center.v},
              {"depth", d.depth},  {"vx", d.vx},
              {"vy", d.vy},        {"class", d.cls},
              {"confidence", d.confidence},
              {"du", d.displacement.du},
              {"dv", d.displacement.dv}};
    if (d.bbox) o["bbox"] = {d.bbox->u_min, d.bbox->v_min, d.bbox->u_max, d.bbox->v_max};
    merge_extra(o, rd.extra);
    dets.push_back(std::move(o));
  }
  json radar = json::array();
  for (const auto& rr : r.radar) {
    const RadarPoint& p = rr.point;
    json o = {{"x", p.position.x}, {"y", p.position.y}, {"z", p.position.z},
              {"vx", p.vx},        {"vy", p.vy}};
    merge_extra(o, rr.extra);
    radar.push_back(std::move(o));
  }
  json out = {{"frame_index", r.frame_index},
              {"timestamp", r.timestamp},
              {"detections", std::move(dets)},
              {"radar", std::move(radar)}};
  merge_extra(out, r.extra);
  return out;
}

ReplayRecord replay_from_json(const json& j) {
  ReplayRecord r;
  r.frame_index = integer(j, "frame_index");
  r.timestamp = number_or(j, "timestamp", 0.0);
  for (const auto& o : array_of(j, "detections")) {
    ReplayDetection rd;
    Detection& d = rd.det;
    d.center = {number(o, "u"), number(o, "v")};
    d.depth = number(o, "depth");
    d.vx = number_or(o, "vx", 0.0);
    d.vy = number_or(o, "vy", 0.0);
    d.cls = static_cast<int>(integer(o, "class"));
    d.confidence = number_or(o, "confidence", 1.0);
    d.displacement = {number_or(o, "du", 0.0), number_or(o, "dv", 0.0)};
    if (o.contains("bbox")) {
      const json& b = o.at("bbox");
      if (!b.is_array() || b.size() != 4) throw InputError("bbox must be [u_min, v_min, u_max, v_max]");
      d.bbox = BoundingBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    }
    rd.extra = leftovers(o, {"u", "v", "depth", "vx", "vy", "class", "confidence", "du", "dv", "bbox"});
    r.detections.push_back(std::move(rd));
  }
  for (const auto& o : array_of(j, "radar")) {
    ReplayRadar rr;
    rr.point.position = {number(o, "x"), number(o, "y"), number_or(o, "z", 0.0)};
    rr.point.vx = number_or(o, "vx", 0.0);
    rr.point.vy = number_or(o, "vy", 0.0);
    rr.extra = leftovers(o, {"x", "y", "z", "vx", "vy"});
    r.radar.push_back(std::move(rr));
  }
  r.extra = leftovers(j, {"frame_index", "timestamp", "detections", "radar"});
  return r;
}

ResultRecord ResultRecord::from(const FrameResult& fr, const CameraModel& cam) {
  ResultRecord r;
  r.frame_index = fr.frame_index;
  r.timestamp = fr.timestamp;
  for (const auto& t : fr.tracks) {
    const VehiclePoint p = track_position(t, cam);
    ResultTrack rt;
    rt.id = t.id;
    rt.u = t.center.u;
    rt.v = t.center.v;
    rt.depth = t.depth;
    rt.vx = t.vx;
    rt.vy = t.vy;
    rt.cls = t.cls;
    rt.confidence = t.confidence;
    rt.fused = t.fused;
    rt.x = p.x;
    rt.y = p.y;
    r.tracks.push_back(rt);
  }
  return r;
}

metrics::PredFrame ResultRecord::to_pred_frame() const {
  metrics::PredFrame f;
  f.frame_index = frame_index;
  for (const auto& t : tracks) f.objects.push_back({t.id, t.x, t.y, t.cls, t.confidence});
  return f;
}

json to_json(const ResultRecord& r) {
  json tracks = json::array();
  for (const auto& t : r.tracks) {
    json o = {{"id", t.id},       {"u", t.u},         {"v", t.v},
              {"depth", t.depth}, {"vx", t.vx},       {"vy", t.vy},
              {"class", t.cls},   {"confidence", t.confidence},
              {"fused", t.fused}, {"x", t.x},         {"y", t.y}};
    merge_extra(o, t.extra);
    tracks.push_back(std::move(o));
  }
  json out = {{"frame_index", r.frame_index}, {"timestamp", r.timestamp}, {"tracks", std::move(tracks)}};
  merge_extra(out, r.extra);
  return out;
}

ResultRecord result_from_json(const json& j) {
  ResultRecord r;
  r.frame_index = integer(j, "frame_index");
  r.timestamp = number_or(j, "timestamp", 0.0);
  std::set<TrackId> seen;
  for (const auto& o : array_of(j, "tracks")) {
    ResultTrack t;
    const auto id = integer(o, "id");
    if (id < 0) throw InputError("track id must be non-negative");
    t.id = static_cast<TrackId>(id);
    if (!seen.insert(t.id).second) throw InputError("duplicate track id " + std::to_string(t.id));
    t.u = number_or(o, "u", 0.0);
    t.v = number_or(o, "v", 0.0);
    t.depth = number_or(o, "depth", 0.0);
    t.vx = number_or(o, "vx", 0.0);
    t.vy = number_or(o, "vy", 0.0);
    t.cls = static_cast<int>(integer(o, "class"));
    t.confidence = number_or(o, "confidence", 1.0);
    t.fused = o.contains("fused") ? o.at("fused").get<bool>() : false;
    t.x = number(o, "x");
    t.y = number(o, "y");
    t.extra = leftovers(o, {"id", "u", "v", "depth", "vx", "vy", "class", "confidence", "fused", "x", "y"});
    r.tracks.push_back(std::move(t));
  }
  r.extra = leftovers(j, {"frame_index", "timestamp", "tracks"});
  return r;
}

json to_json(const metrics::GroundTruthFrame& g) {
  json objects = json::array();
  for (const auto& o : g.objects)
    objects.push_back({{"id", o.id}, {"x", o.x}, {"y", o.y}, {"class", o.cls}});
  return {{"frame_index", g.frame_index}, {"timestamp", g.timestamp}, {"objects", std::move(objects)}};
}

metrics::GroundTruthFrame gt_from_json(const json& j) {
  metrics::GroundTruthFrame g;
  g.frame_index = integer(j, "frame_index");
  g.timestamp = number_or(j, "timestamp", 0.0);
  for (const auto& o : array_of(j, "objects"))
    g.objects.push_back({integer(o, "id"), number(o, "x"), number(o, "y"),
                         static_cast<int>(integer(o, "class"))});
  return g;
}

std::vector<ReplayRecord> read_replay(std::istream& in) {
  return read_lines<ReplayRecord>(in, replay_from_json);
}
std::vector<ResultRecord> read_results(std::istream& in) {
  return read_lines<ResultRecord>(in, result_from_json);
}
std::vector<metrics::GroundTruthFrame> read_ground_truth(std::istream& in) {
  return read_lines<metrics::GroundTruthFrame>(in, gt_from_json);
}

void write_replay(std::ostream& out, std::span<const ReplayRecord> records) { write_lines(out, records); }
void write_results(std::ostream& out, std::span<const ResultRecord> records) { write_lines(out, records); }
void write_ground_truth(std::ostream& out, std::span<const metrics::GroundTruthFrame> frames) {
  write_lines(out, frames);
}

std::vector<ReplayRecord> read_replay_file(const std::filesystem::path& p) {
  auto in = open_input(p);
  return read_replay(in);
}
std::vector<ResultRecord> read_results_file(const std::filesystem::path& p) {
  auto in = open_input(p);
  return read_results(in);
}
std::vector<metrics::GroundTruthFrame> read_ground_truth_file(const std::filesystem::path& p) {
  auto in = open_input(p);
  return read_ground_truth(in);
}

std::vector<ReplayRecord> replay_of(const sim::Scene& scene) {
  std::vector<ReplayRecord> out;
  for (const auto& f : scene.frames) out.push_back(ReplayRecord::from(f.input));
  return out;
}

std::vector<metrics::GroundTruthFrame> ground_truth_of(const sim::Scene& scene) {
  std::vector<metrics::GroundTruthFrame> out;
  for (const auto& f : scene.frames) out.push_back(f.gt);
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + what);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

std::vector<double> vec_of(const json& j, const char* key, std::size_t n) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != n)
    throw ConfigError(std::string("key '") + key + "' must be an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(std::string("key '") + key + "' must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

json to_json(const CameraModel& cam) {
  const auto& r = cam.extrinsic.rotation;
  const auto& t = cam.extrinsic.translation;
  return {{"fx", cam.fx},
          {"fy", cam.fy},
          {"cx", cam.cx},
          {"cy", cam.cy},
          {"width", cam.image_width},
          {"height", cam.image_height},
          {"rotation", {{r(0, 0), r(0, 1), r(0, 2)}, {r(1, 0), r(1, 1), r(1, 2)}, {r(2, 0), r(2, 1), r(2, 2)}}},
          {"translation", {t.x(), t.y(), t.z()}}};
}

CameraModel camera_from_json(const json& j) {
  reject_unknown(j, {"fx", "fy", "cx", "cy", "width", "height", "rotation", "translation", "mount"}, "camera");
  const CameraModel base = CameraModel::standard();
  const double fx = get_or(j, "fx", base.fx);
  const double fy = get_or(j, "fy", base.fy);
  const double cx = get_or(j, "cx", base.cx);
  const double cy = get_or(j, "cy", base.cy);
  const int w = get_or(j, "width", base.image_width);
  const int h = get_or(j, "height", base.image_height);
  CameraModel cam;
  if (j.contains("rotation")) {
    if (j.contains("mount")) throw ConfigError("camera: give either 'mount' or 'rotation'/'translation'");
    const json& rj = j.at("rotation");
    if (!rj.is_array() || rj.size() != 3) throw ConfigError("camera rotation must be 3x3");
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    cam.image_width = w;
    cam.image_height = h;
    for (int r = 0; r < 3; ++r) {
      if (!rj[r].is_array() || rj[r].size() != 3) throw ConfigError("camera rotation must be 3x3");
      for (int c = 0; c < 3; ++c) cam.extrinsic.rotation(r, c) = rj[r][c].get<double>();
    }
    if (j.contains("translation")) {
      const auto t = vec_of(j, "translation", 3);
      cam.extrinsic.translation = {t[0], t[1], t[2]};
    }
  } else {
    VehiclePoint mount{0.0, 0.0, 1.0};
    if (j.contains("mount")) {
      const auto m = vec_of(j, "mount", 3);
      mount = {m[0], m[1], m[2]};
    }
    cam = CameraModel::forward_facing(fx, fy, cx, cy, w, h, mount);
  }
  cam.validate();
  return cam;
}

json to_json(const sim::ScenarioConfig& cfg) {
  json objects = json::array();
  for (const auto& o : cfg.objects)
    objects.push_back({{"class", o.cls},
                       {"position", {o.initial.x, o.initial.y, o.initial.z}},
                       {"velocity", {o.vx, o.vy}},
                       {"size", {o.size_x, o.size_y, o.size_z}}});
  return {{"seed", cfg.seed},
          {"num_frames", cfg.num_frames},
          {"frame_dt", cfg.frame_dt},
          {"camera", to_json(cfg.camera)},
          {"objects", std::move(objects)},
          {"noise",
           {{"center_px", cfg.noise.center_px},
            {"depth_m", cfg.noise.depth_m},
            {"velocity_mps", cfg.noise.velocity_mps},
            {"displacement_px", cfg.noise.displacement_px}}},
          {"dropout", cfg.dropout},
          {"radar",
           {{"points_per_object", cfg.radar.points_per_object},
            {"position_sigma", cfg.radar.position_sigma},
            {"velocity_sigma", cfg.radar.velocity_sigma},
            {"clutter_per_frame", cfg.radar.clutter_per_frame},
            {"clutter_min_depth", cfg.radar.clutter_min_depth},
            {"clutter_max_depth", cfg.radar.clutter_max_depth}}},
          {"occlusion", {{"enabled", cfg.occlusion.enabled}, {"iou_threshold", cfg.occlusion.iou_threshold}}}};
}

sim::ScenarioConfig scenario_from_json(const json& j) {
  reject_unknown(j, {"seed", "num_frames", "frame_dt", "camera", "objects", "noise", "dropout", "radar",
                     "occlusion", "crossing"},
                 "scenario");
  const auto seed = get_or<std::uint64_t>(j, "seed", 0);
  sim::ScenarioConfig cfg;
  if (j.contains("crossing")) {
    const json& c = j.at("crossing");
    reject_unknown(c, {"depth_gap"}, "crossing");
    cfg = sim::crossing_scenario(get_or(c, "depth_gap", 10.0), seed);
  }
  cfg.seed = seed;
  cfg.num_frames = get_or(j, "num_frames", cfg.num_frames);
  cfg.frame_dt = get_or(j, "frame_dt", cfg.frame_dt);
  if (j.contains("camera")) cfg.camera = camera_from_json(j.at("camera"));
  if (j.contains("objects")) {
    const json& arr = j.at("objects");
    if (!arr.is_array()) throw ConfigError("'objects' must be an array");
    cfg.objects.clear();
    for (const auto& o : arr) {
      reject_unknown(o, {"class", "position", "velocity", "size"}, "object");
      sim::ObjectSpec s;
      s.cls = get_or(o, "class", 0);
      if (!o.contains("position")) throw ConfigError("object without 'position'");
      const auto p = vec_of(o, "position", 3);
      s.initial = {p[0], p[1], p[2]};
      if (o.contains("velocity")) {
        const auto v = vec_of(o, "velocity", 2);
        s.vx = v[0];
        s.vy = v[1];
      }
      if (o.contains("size")) {
        const auto z = vec_of(o, "size", 3);
        s.size_x = z[0];
        s.size_y = z[1];
        s.size_z = z[2];
      }
      cfg.objects.push_back(s);
    }
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    reject_unknown(n, {"center_px", "depth_m", "velocity_mps", "displacement_px"}, "noise");
    cfg.noise.center_px = get_or(n, "center_px", cfg.noise.center_px);
    cfg.noise.depth_m = get_or(n, "depth_m", cfg.noise.depth_m);
    cfg.noise.velocity_mps = get_or(n, "velocity_mps", cfg.noise.velocity_mps);
    cfg.noise.displacement_px = get_or(n, "displacement_px", cfg.noise.displacement_px);
  }
  cfg.dropout = get_or(j, "dropout", cfg.dropout);
  if (j.contains("radar")) {
    const json& r = j.at("radar");
    reject_unknown(r, {"points_per_object", "position_sigma", "velocity_sigma", "clutter_per_frame",
                       "clutter_min_depth", "clutter_max_depth"},
                   "radar");
    cfg.radar.points_per_object = get_or(r, "points_per_object", cfg.radar.points_per_object);
    cfg.radar.position_sigma = get_or(r, "position_sigma", cfg.radar.position_sigma);
    cfg.radar.velocity_sigma = get_or(r, "velocity_sigma", cfg.radar.velocity_sigma);
    cfg.radar.clutter_per_frame = get_or(r, "clutter_per_frame", cfg.radar.clutter_per_frame);
    cfg.radar.clutter_min_depth = get_or(r, "clutter_min_depth", cfg.radar.clutter_min_depth);
    cfg.radar.clutter_max_depth = get_or(r, "clutter_max_depth", cfg.radar.clutter_max_depth);
  }
  if (j.contains("occlusion")) {
    const json& o = j.at("occlusion");
    reject_unknown(o, {"enabled", "iou_threshold"}, "occlusion");
    cfg.occlusion.enabled = get_or(o, "enabled", cfg.occlusion.enabled);
    cfg.occlusion.iou_threshold = get_or(o, "iou_threshold", cfg.occlusion.iou_threshold);
  }
  cfg.validate();
  return cfg;
}

json to_json(const TrackerConfig& cfg) {
  return {{"alpha", cfg.weights.alpha},
          {"beta", cfg.weights.beta},
          {"delta", cfg.weights.delta},
          {"radius", cfg.weights.radius},
          {"max_age", cfg.max_age},
          {"min_confidence", cfg.min_confidence},
          {"fusion_enabled", cfg.fusion_enabled},
          {"exclusive", cfg.fusion.exclusive},
          {"depth_tolerance", cfg.fusion.depth_tolerance},
          {"pillar_dims", {cfg.pillar_dims.width_y, cfg.pillar_dims.height_z, cfg.pillar_dims.depth_x}},
          {"camera", to_json(cfg.camera)}};
}

TrackerConfig tracker_config_from_json(const json& j, TrackerConfig base) {
  reject_unknown(j, {"alpha", "beta", "delta", "radius", "max_age", "min_confidence", "fusion_enabled",
                     "exclusive", "depth_tolerance", "pillar_dims", "camera"},
                 "tracker config");
  TrackerConfig cfg = std::move(base);
  cfg.weights.alpha = get_or(j, "alpha", cfg.weights.alpha);
  cfg.weights.beta = get_or(j, "beta", cfg.weights.beta);
  cfg.weights.delta = get_or(j, "delta", cfg.weights.delta);
  cfg.weights.radius = get_or(j, "radius", cfg.weights.radius);
  cfg.max_age = get_or(j, "max_age", cfg.max_age);
  cfg.min_confidence = get_or(j, "min_confidence", cfg.min_confidence);
  cfg.fusion_enabled = get_or(j, "fusion_enabled", cfg.fusion_enabled);
  cfg.fusion.exclusive = get_or(j, "exclusive", cfg.fusion.exclusive);
  cfg.fusion.depth_tolerance = get_or(j, "depth_tolerance", cfg.fusion.depth_tolerance);
  if (j.contains("pillar_dims")) {
    const auto d = vec_of(j, "pillar_dims", 3);
    cfg.pillar_dims = {d[0], d[1], d[2]};
  }
  if (j.contains("camera")) cfg.camera = camera_from_json(j.at("camera"));
  cfg.validate();
  return cfg;
}

json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

}  // namespace radtrack::io
