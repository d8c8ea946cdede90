#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "radtrack/metrics.hpp"
#include "radtrack/simulator.hpp"
#include "radtrack/tracker.hpp"

namespace radtrack::io {

using json = nlohmann::json;

/// Line formats are described in docs/formats.md. Keys a reader does not
/// know are kept in `extra` and written back unchanged.

struct ReplayDetection {
  Detection det;
  json extra = json::object();
  bool operator==(const ReplayDetection&) const = default;
};

struct ReplayRadar {
  RadarPoint point;
  json extra = json::object();
  bool operator==(const ReplayRadar&) const = default;
};

struct ReplayRecord {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<ReplayDetection> detections;
  std::vector<ReplayRadar> radar;
  json extra = json::object();

  FrameInput to_frame_input() const;
  static ReplayRecord from(const FrameInput& in);
  bool operator==(const ReplayRecord&) const = default;
};

struct ResultTrack {
  TrackId id = 0;
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  int cls = 0;
  double confidence = 0.0;
  bool fused = false;
  double x = 0.0;  // vehicle frame, derived from (u, v, depth)
  double y = 0.0;
  json extra = json::object();
  bool operator==(const ResultTrack&) const = default;
};

struct ResultRecord {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<ResultTrack> tracks;
  json extra = json::object();

  static ResultRecord from(const FrameResult& r, const CameraModel& cam);
  metrics::PredFrame to_pred_frame() const;
  bool operator==(const ResultRecord&) const = default;
};

json to_json(const ReplayRecord& r);
json to_json(const ResultRecord& r);
json to_json(const metrics::GroundTruthFrame& g);

/// Throw Error subclasses on missing or mistyped keys.
ReplayRecord replay_from_json(const json& j);
ResultRecord result_from_json(const json& j);
metrics::GroundTruthFrame gt_from_json(const json& j);

/// Readers skip blank lines and throw ParseError with the 1-based line number.
std::vector<ReplayRecord> read_replay(std::istream& in);
std::vector<ResultRecord> read_results(std::istream& in);
std::vector<metrics::GroundTruthFrame> read_ground_truth(std::istream& in);

void write_replay(std::ostream& out, std::span<const ReplayRecord> records);
void write_results(std::ostream& out, std::span<const ResultRecord> records);
void write_ground_truth(std::ostream& out, std::span<const metrics::GroundTruthFrame> frames);

std::vector<ReplayRecord> read_replay_file(const std::filesystem::path& p);
std::vector<ResultRecord> read_results_file(const std::filesystem::path& p);
std::vector<metrics::GroundTruthFrame> read_ground_truth_file(const std::filesystem::path& p);

/// Scene export: one replay record and one ground-truth record per frame.
std::vector<ReplayRecord> replay_of(const sim::Scene& scene);
std::vector<metrics::GroundTruthFrame> ground_truth_of(const sim::Scene& scene);

// Configuration files (JSON). Unknown keys are rejected with ConfigError.
json to_json(const CameraModel& cam);
CameraModel camera_from_json(const json& j);
json to_json(const sim::ScenarioConfig& cfg);
sim::ScenarioConfig scenario_from_json(const json& j);
json to_json(const TrackerConfig& cfg);
/// Keys present in `j` override `base`.
TrackerConfig tracker_config_from_json(const json& j, TrackerConfig base = {});

/// Parses a whole JSON document; ConfigError on failure.
json read_json_file(const std::filesystem::path& p);

}  // namespace radtrack::io
