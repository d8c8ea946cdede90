#include "radtrack/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include "radtrack/error.hpp"

namespace radtrack {

void TrackerConfig::validate() const {
  weights.validate();
  pillar_dims.validate();
  fusion.validate();
  camera.validate();
  if (max_age < 1) throw ConfigError("max_age must be at least 1");
  if (!(min_confidence >= 0.0 && min_confidence < 1.0))
    throw ConfigError("min_confidence must lie in [0, 1)");
}

namespace {

void apply_fusion(std::vector<Detection>& dets, std::vector<bool>& fused,
                  std::span<const RadarPoint> radar, const TrackerConfig& cfg) {
  std::vector<PreliminaryDetection> prelim;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!dets[i].bbox) continue;
    prelim.push_back({*dets[i].bbox, dets[i].depth, dets[i].cls, dets[i].confidence});
    owner.push_back(i);
  }
  if (prelim.empty() || radar.empty()) return;
  const auto pillars = expand_pillars(radar, cfg.pillar_dims);
  const auto assoc = frustum_associate(prelim, pillars, cfg.camera, cfg.fusion);
  for (std::size_t k = 0; k < assoc.size(); ++k) {
    if (!assoc[k]) continue;
    Detection& d = dets[owner[k]];
    d.depth = assoc[k]->depth;
    d.vx = assoc[k]->vx;
    d.vy = assoc[k]->vy;
    fused[owner[k]] = true;
  }
}

}  // namespace

StepOutput step(const TrackerState& state, const FrameInput& input, const TrackerConfig& cfg) {
  if (state.last_frame && input.frame_index <= *state.last_frame)
    throw InputError("frame " + std::to_string(input.frame_index) + " does not follow frame " +
                     std::to_string(*state.last_frame));
  if (state.last_frame && input.timestamp < state.last_timestamp)
    throw InputError("timestamp decreases at frame " + std::to_string(input.frame_index));

  std::vector<Detection> dets;
  dets.reserve(input.detections.size());
  for (const auto& d : input.detections) {
    d.validate();
    if (d.confidence >= cfg.min_confidence) dets.push_back(d);
  }
  std::vector<bool> fused(dets.size(), false);
  if (cfg.fusion_enabled) apply_fusion(dets, fused, input.radar, cfg);

  const AssociationResult assoc = greedy_associate(dets, state.tracks, cfg.weights);

  StepOutput out;
  if (cfg.record_trace) out.trace = AssociationTrace{dets, state.tracks, assoc};

  TrackerState next;
  next.next_id = state.next_id;
  next.last_frame = input.frame_index;
  next.last_timestamp = input.timestamp;

  std::unordered_map<TrackId, std::size_t> match_of;  // track id -> detection index
  match_of.reserve(assoc.matches.size());
  for (const auto& m : assoc.matches) match_of.emplace(m.track_id, m.det_index);

  std::vector<TrackId> reported;
  next.tracks.reserve(state.tracks.size() + assoc.unmatched_dets.size());
  for (Track t : state.tracks) {
    ++t.age;
    if (auto it = match_of.find(t.id); it != match_of.end()) {
      const Detection& d = dets[it->second];
      t.center = d.center;
      t.depth = d.depth;
      t.vx = d.vx;
      t.vy = d.vy;
      t.confidence = d.confidence;
      t.last_seen = input.frame_index;
      t.misses = 0;
      t.fused = fused[it->second];
      reported.push_back(t.id);
    } else {
      ++t.misses;
      if (t.misses >= cfg.max_age) continue;
    }
    next.tracks.push_back(t);
  }
  for (std::size_t di : assoc.unmatched_dets) {
    const Detection& d = dets[di];
    Track t;
    t.id = next.next_id++;
    t.center = d.center;
    t.depth = d.depth;
    t.vx = d.vx;
    t.vy = d.vy;
    t.cls = d.cls;
    t.confidence = d.confidence;
    t.last_seen = input.frame_index;
    t.fused = fused[di];
    next.tracks.push_back(t);
    reported.push_back(t.id);
  }

  out.result.frame_index = input.frame_index;
  out.result.timestamp = input.timestamp;
  std::sort(reported.begin(), reported.end());
  for (const auto& t : next.tracks)
    if (std::binary_search(reported.begin(), reported.end(), t.id)) out.result.tracks.push_back(t);
  out.state = std::move(next);
  return out;
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return samples[rank - 1];
}

LatencyStats summarize_latency(std::vector<double> samples_ms) {
  LatencyStats s;
  s.frames = samples_ms.size();
  if (samples_ms.empty()) return s;
  s.median_ms = percentile(samples_ms, 0.5);
  s.p99_ms = percentile(samples_ms, 0.99);
  s.max_ms = *std::max_element(samples_ms.begin(), samples_ms.end());
  return s;
}

SequenceOutput run_sequence(std::span<const FrameInput> inputs, const TrackerConfig& cfg) {
  cfg.validate();
  SequenceOutput out;
  out.frames.reserve(inputs.size());
  std::vector<double> latency;
  latency.reserve(inputs.size());
  TrackerState state;
  for (const auto& in : inputs) {
    const auto t0 = std::chrono::steady_clock::now();
    StepOutput s = step(state, in, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    latency.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    state = std::move(s.state);
    out.frames.push_back(std::move(s.result));
    if (s.trace) out.traces.push_back(std::move(*s.trace));
  }
  out.latency = summarize_latency(std::move(latency));
  return out;
}

VehiclePoint track_position(const Track& t, const CameraModel& cam) {
  return backproject_at_depth(t.center, t.depth, cam);
}

Heatmap prior_heatmap(const TrackerState& state, const HeatmapConfig& cfg, double sigma_cells) {
  cfg.validate();
  std::vector<GaussianCenter> centers;
  for (const auto& t : state.tracks) {
    if (t.cls < 0 || t.cls >= cfg.num_classes) continue;
    const int col = static_cast<int>(std::floor(t.center.u / cfg.downsample));
    const int row = static_cast<int>(std::floor(t.center.v / cfg.downsample));
    if (col < 0 || col >= cfg.grid_width() || row < 0 || row >= cfg.grid_height()) continue;
    centers.push_back({{col, row}, t.cls, sigma_cells});
  }
  return render_gaussian(centers, cfg);
}

}  // namespace radtrack
