#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "radtrack/association.hpp"
#include "radtrack/fusion.hpp"
#include "radtrack/geometry.hpp"
#include "radtrack/heatmap.hpp"

namespace radtrack {

struct FrameInput {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<Detection> detections;
  std::vector<RadarPoint> radar;
};

struct TrackerConfig {
  CostWeights weights;
  PillarDims pillar_dims;
  FusionParams fusion;
  /// A track is deleted once it has gone this many consecutive frames unmatched.
  int max_age = 3;
  /// Detections below this confidence are ignored (and never spawn tracks).
  double min_confidence = 0.3;
  bool fusion_enabled = true;
  CameraModel camera = CameraModel::standard();
  /// Keep the association inputs/outputs of each step (diagnostics, sweeps).
  bool record_trace = false;

  void validate() const;
};

struct FrameResult {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  /// Tracks matched or created in this frame, ascending id.
  std::vector<Track> tracks;

  bool operator==(const FrameResult&) const = default;
};

struct TrackerState {
  std::vector<Track> tracks;  // ascending id
  TrackId next_id = 1;
  std::optional<std::int64_t> last_frame;
  double last_timestamp = 0.0;

  bool operator==(const TrackerState&) const = default;
};

/// What the association step saw in one frame.
struct AssociationTrace {
  std::vector<Detection> detections;  // after the confidence floor and radar fusion
  std::vector<Track> prior_tracks;
  AssociationResult association;
};

struct StepOutput {
  TrackerState state;
  FrameResult result;
  std::optional<AssociationTrace> trace;
};

/// One tracking step: confidence floor, optional radar fusion, greedy
/// association, track update/spawn/expiry. Throws InputError when the frame
/// index does not increase or the timestamp decreases.
StepOutput step(const TrackerState& state, const FrameInput& input, const TrackerConfig& cfg);

struct LatencyStats {
  double median_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  std::size_t frames = 0;
};

/// Nearest-rank percentile, q in [0, 1]; 0 for empty input.
double percentile(std::vector<double> samples, double q);
LatencyStats summarize_latency(std::vector<double> samples_ms);

struct SequenceOutput {
  std::vector<FrameResult> frames;
  std::vector<AssociationTrace> traces;  // filled when cfg.record_trace
  LatencyStats latency;
};

SequenceOutput run_sequence(std::span<const FrameInput> inputs, const TrackerConfig& cfg);

/// Stateful convenience wrapper around `step`.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  FrameResult update(const FrameInput& input) {
    auto out = step(state_, input, cfg_);
    state_ = std::move(out.state);
    return std::move(out.result);
  }
  const TrackerState& state() const { return state_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  TrackerState state_;
};

/// Vehicle-frame position of a track from its image center and depth.
VehiclePoint track_position(const Track& t, const CameraModel& cam);

/// Single-channel-per-class Gaussian rendering of the live track centers
/// (diagnostic view of the prior-detection heatmap).
Heatmap prior_heatmap(const TrackerState& state, const HeatmapConfig& cfg, double sigma_cells);

}  // namespace radtrack
