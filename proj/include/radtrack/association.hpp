#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "radtrack/geometry.hpp"

namespace radtrack {

using TrackId = std::uint64_t;

/// Image-plane motion of an object's center between the previous and the
/// current frame, pixels. The previous center is recovered as center - displacement.
struct PixelOffset {
  double du = 0.0;
  double dv = 0.0;
  bool operator==(const PixelOffset&) const = default;
};

/// One detected object in the current frame.
struct Detection {
  Pixel center;
  double depth = 1.0;
  double vx = 0.0;
  double vy = 0.0;
  int cls = 0;
  double confidence = 1.0;
  PixelOffset displacement;
  std::optional<BoundingBox> bbox;

  /// Throws InputError on non-finite values, depth <= 0 or confidence outside [0, 1].
  void validate() const;
  Pixel gated_position() const { return {center.u - displacement.du, center.v - displacement.dv}; }
  bool operator==(const Detection&) const = default;
};

/// Persistent identity with the state of its most recent match.
struct Track {
  TrackId id = 0;
  Pixel center;
  double depth = 1.0;
  double vx = 0.0;
  double vy = 0.0;
  int cls = 0;
  double confidence = 0.0;
  std::int64_t last_seen = 0;
  /// Frames since creation.
  int age = 0;
  /// Consecutive frames without a match.
  int misses = 0;
  /// Depth/velocity came from a radar pillar in the last match.
  bool fused = false;

  bool operator==(const Track&) const = default;
};

/// Weights of the pixel, depth and velocity terms plus the gate radius (pixels).
struct CostWeights {
  double alpha = 1.0 / 900.0;
  double beta = 0.04;
  double delta = 0.25;
  double radius = 30.0;

  void validate() const;
  bool operator==(const CostWeights&) const = default;
};

/// alpha * |dp|^2 + beta * dd^2 + delta * |dv|^2 for same-class pairs, +inf otherwise.
double pairwise_cost(const Detection& det, const Track& trk, const CostWeights& w);

/// True when the track center lies within the gate radius of det.center - det.displacement.
bool in_gate(const Detection& det, const Track& trk, double radius);

struct Match {
  std::size_t det_index = 0;
  TrackId track_id = 0;
  double cost = 0.0;
  bool operator==(const Match&) const = default;
};

struct AssociationResult {
  /// In processing order.
  std::vector<Match> matches;
  /// Detection indices in processing order (confidence descending).
  std::vector<std::size_t> unmatched_dets;
  /// Ascending id.
  std::vector<TrackId> unmatched_tracks;

  double total_cost() const;
};

/// Radius-gated greedy matching. Detections are visited by descending
/// confidence (ties: lower index); each takes the cheapest finite-cost
/// unmatched track inside its gate (ties: lower id).
/// Throws InputError on duplicate track ids.
AssociationResult greedy_associate(std::span<const Detection> dets, std::span<const Track> tracks,
                                   const CostWeights& w);

}  // namespace radtrack
