#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radtrack/association.hpp"

namespace radtrack::metrics {

/// Tracking classes of the benchmark, indexed by class id.
inline constexpr const char* kClassNames[] = {"car",        "truck",      "bus",    "trailer",
                                              "pedestrian", "motorcycle", "bicycle"};

/// Name for a class id, or the id in decimal when it has no name.
std::string class_name(int cls);
/// Accepts a name from kClassNames or a decimal id; nullopt otherwise.
std::optional<int> class_from_name(const std::string& name);

struct GtObject {
  std::int64_t id = 0;
  double x = 0.0;
  double y = 0.0;
  int cls = 0;
  bool operator==(const GtObject&) const = default;
};

struct GroundTruthFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<GtObject> objects;
  bool operator==(const GroundTruthFrame&) const = default;
};

/// Tracker output reduced to what evaluation needs; positions in the vehicle frame.
struct PredObject {
  TrackId id = 0;
  double x = 0.0;
  double y = 0.0;
  int cls = 0;
  double confidence = 1.0;
  bool operator==(const PredObject&) const = default;
};

struct PredFrame {
  std::int64_t frame_index = 0;
  std::vector<PredObject> objects;
  bool operator==(const PredFrame&) const = default;
};

struct FrameMatch {
  std::size_t gt_index = 0;
  std::size_t pred_index = 0;
  double distance = 0.0;
};

struct FrameMatching {
  std::vector<FrameMatch> matches;  // ascending gt id
  std::vector<std::size_t> unmatched_gt;
  std::vector<std::size_t> unmatched_pred;

  std::size_t false_positives() const { return unmatched_pred.size(); }
  std::size_t false_negatives() const { return unmatched_gt.size(); }
};

/// gt id -> id of the track it was last matched to.
using MatchHistory = std::map<std::int64_t, TrackId>;

/// Class-gated greedy matching by ascending ground-plane distance (ties: gt
/// id, then track id), pairs farther than `dist_threshold` rejected. Pairs
/// that continue a match recorded in `history` are taken first, under the
/// same ordering. Throws InputError on duplicate ids within the frame.
FrameMatching match_frame(std::span<const PredObject> preds, const GroundTruthFrame& gt,
                          double dist_threshold, const MatchHistory& history = {});

struct ErrorCounts {
  double confidence_floor = 0.0;
  std::size_t ids = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t num_gt = 0;  // P
  /// Matched-pair distances (m): frame order, ascending gt id within a frame.
  std::vector<double> distances;

  double recall() const;
  /// Mean matched distance; `fallback` when nothing matched.
  double motp(double fallback) const;
  double mota() const;
  bool operator==(const ErrorCounts&) const = default;
};

/// Throws InputError when the sequences differ in length or frame index,
/// naming the first bad frame.
void check_alignment(std::span<const PredFrame> preds, std::span<const GroundTruthFrame> gt);

/// Counts IDS/FP/FN over a sequence using predictions with confidence >= floor.
ErrorCounts count_sequence_errors(std::span<const PredFrame> preds,
                                  std::span<const GroundTruthFrame> gt, double confidence_floor,
                                  double dist_threshold);

/// max(0, 1 - (IDS + FP + FN - (1 - r) P) / (r P)), also capped at 1.
/// Throws InputError for r outside (0, 1] or P == 0.
double motar(const ErrorCounts& counts, double r, std::size_t num_gt);

struct Protocol {
  int n = 40;
  double dist_threshold = 2.0;
  /// Restrict per-class rows (and the aggregate) to these classes.
  std::optional<std::vector<int>> classes;
  int threads = 1;

  void validate() const;
};

struct ThresholdRow {
  double recall_threshold = 0.0;
  std::optional<double> confidence_floor;  // nullopt: recall unreachable
  double achieved_recall = 0.0;
  double motar = 0.0;
  double motp = 0.0;
  std::size_t ids = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct ClassReport {
  int cls = -1;  // -1 for the aggregate row
  std::size_t num_gt = 0;
  double amota = 0.0;
  double amotp = 0.0;
  double motar = 0.0;
  double mota = 0.0;
  double motp = 0.0;
  double recall = 0.0;
  std::size_t ids = 0;  // at the MOTA-optimal floor
  std::vector<ThresholdRow> thresholds;
};

struct MetricsReport {
  int n = 0;
  double dist_threshold = 0.0;
  std::vector<ClassReport> classes;
  ClassReport aggregate;
};

/// AMOTA over recall thresholds {1/(n-1), ..., 1} for predictions and ground
/// truth already restricted to one class.
ClassReport evaluate_single(std::span<const PredFrame> preds, std::span<const GroundTruthFrame> gt,
                            int cls, const Protocol& protocol);

/// Per-class reports for every class present in the ground truth (or in
/// `protocol.classes`), plus their mean as the aggregate.
/// Throws InputError when there is no ground truth at all.
MetricsReport amota(std::span<const PredFrame> preds, std::span<const GroundTruthFrame> gt,
                    const Protocol& protocol);

}  // namespace radtrack::metrics
