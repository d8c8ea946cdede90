#include "radtrack/metrics.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>
#include <unordered_set>

#include "radtrack/error.hpp"
#include "radtrack/parallel.hpp"

namespace radtrack::metrics {

std::string class_name(int cls) {
  if (cls >= 0 && cls < static_cast<int>(std::size(kClassNames))) return kClassNames[cls];
  return std::to_string(cls);
}

std::optional<int> class_from_name(const std::string& name) {
  for (int i = 0; i < static_cast<int>(std::size(kClassNames)); ++i)
    if (name == kClassNames[i]) return i;
  if (name.empty()) return std::nullopt;
  int value = 0;
  for (char c : name) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

namespace {

struct Candidate {
  double distance;
  std::int64_t gt_id;
  TrackId track_id;
  std::size_t gt_index;
  std::size_t pred_index;

  auto key() const { return std::tie(distance, gt_id, track_id); }
};

void greedy_take(std::vector<Candidate>& cands, std::vector<bool>& gt_used,
                 std::vector<bool>& pred_used, std::vector<FrameMatch>& out) {
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });
  for (const auto& c : cands) {
    if (gt_used[c.gt_index] || pred_used[c.pred_index]) continue;
    gt_used[c.gt_index] = true;
    pred_used[c.pred_index] = true;
    out.push_back({c.gt_index, c.pred_index, c.distance});
  }
}

}  // namespace

FrameMatching match_frame(std::span<const PredObject> preds, const GroundTruthFrame& gt,
                          double dist_threshold, const MatchHistory& history) {
  if (!(dist_threshold > 0.0)) throw InputError("distance threshold must be positive");
  {
    std::unordered_set<TrackId> pid;
    for (const auto& p : preds)
      if (!pid.insert(p.id).second)
        throw InputError("duplicate track id " + std::to_string(p.id) + " in frame " +
                         std::to_string(gt.frame_index));
    std::unordered_set<std::int64_t> gid;
    for (const auto& g : gt.objects)
      if (!gid.insert(g.id).second)
        throw InputError("duplicate gt id " + std::to_string(g.id) + " in frame " +
                         std::to_string(gt.frame_index));
  }

  std::vector<Candidate> sticky;
  std::vector<Candidate> rest;
  for (std::size_t gi = 0; gi < gt.objects.size(); ++gi) {
    const auto& g = gt.objects[gi];
    const auto prev = history.find(g.id);
    for (std::size_t pi = 0; pi < preds.size(); ++pi) {
      const auto& p = preds[pi];
      if (p.cls != g.cls) continue;
      const double d = std::hypot(p.x - g.x, p.y - g.y);
      if (!(d <= dist_threshold)) continue;
      Candidate c{d, g.id, p.id, gi, pi};
      if (prev != history.end() && prev->second == p.id) {
        sticky.push_back(c);
      } else {
        rest.push_back(c);
      }
    }
  }

  FrameMatching out;
  std::vector<bool> gt_used(gt.objects.size(), false);
  std::vector<bool> pred_used(preds.size(), false);
  greedy_take(sticky, gt_used, pred_used, out.matches);
  greedy_take(rest, gt_used, pred_used, out.matches);
  std::sort(out.matches.begin(), out.matches.end(), [&](const FrameMatch& a, const FrameMatch& b) {
    return gt.objects[a.gt_index].id < gt.objects[b.gt_index].id;
  });
  for (std::size_t gi = 0; gi < gt_used.size(); ++gi)
    if (!gt_used[gi]) out.unmatched_gt.push_back(gi);
  for (std::size_t pi = 0; pi < pred_used.size(); ++pi)
    if (!pred_used[pi]) out.unmatched_pred.push_back(pi);
  return out;
}

double ErrorCounts::recall() const {
  if (num_gt == 0) return 0.0;
  return static_cast<double>(num_gt - fn) / static_cast<double>(num_gt);
}

double ErrorCounts::motp(double fallback) const {
  if (distances.empty()) return fallback;
  double sum = 0.0;
  for (double d : distances) sum += d;
  return sum / static_cast<double>(distances.size());
}

double ErrorCounts::mota() const {
  if (num_gt == 0) return 0.0;
  return 1.0 - static_cast<double>(ids + fp + fn) / static_cast<double>(num_gt);
}

void check_alignment(std::span<const PredFrame> preds, std::span<const GroundTruthFrame> gt) {
  const std::size_t n = std::min(preds.size(), gt.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i].frame_index != gt[i].frame_index)
      throw InputError("frames misaligned at position " + std::to_string(i) + ": prediction frame " +
                       std::to_string(preds[i].frame_index) + " vs ground-truth frame " +
                       std::to_string(gt[i].frame_index));
  }
  if (preds.size() != gt.size()) {
    const auto first_bad = n < gt.size() ? gt[n].frame_index : preds[n].frame_index;
    throw InputError("frame count mismatch: " + std::to_string(preds.size()) + " prediction vs " +
                     std::to_string(gt.size()) + " ground-truth frames; first unpaired frame " +
                     std::to_string(first_bad));
  }
}

ErrorCounts count_sequence_errors(std::span<const PredFrame> preds,
                                  std::span<const GroundTruthFrame> gt, double confidence_floor,
                                  double dist_threshold) {
  check_alignment(preds, gt);
  ErrorCounts counts;
  counts.confidence_floor = confidence_floor;
  MatchHistory history;
  std::vector<PredObject> kept;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    kept.clear();
    for (const auto& p : preds[f].objects)
      if (p.confidence >= confidence_floor) kept.push_back(p);
    const FrameMatching m = match_frame(kept, gt[f], dist_threshold, history);
    counts.num_gt += gt[f].objects.size();
    counts.fp += m.false_positives();
    counts.fn += m.false_negatives();
    for (const auto& fm : m.matches) {
      const auto gid = gt[f].objects[fm.gt_index].id;
      const auto tid = kept[fm.pred_index].id;
      auto [it, inserted] = history.try_emplace(gid, tid);
      if (!inserted && it->second != tid) {
        ++counts.ids;
        it->second = tid;
      }
      counts.distances.push_back(fm.distance);
    }
  }
  return counts;
}

double motar(const ErrorCounts& counts, double r, std::size_t num_gt) {
  if (!(r > 0.0 && r <= 1.0)) throw InputError("recall threshold must lie in (0, 1]");
  if (num_gt == 0) throw InputError("MOTAR needs at least one annotated object");
  const double p = static_cast<double>(num_gt);
  const double errors = static_cast<double>(counts.ids + counts.fp + counts.fn);
  const double value = 1.0 - (errors - (1.0 - r) * p) / (r * p);
  return std::clamp(value, 0.0, 1.0);
}

void Protocol::validate() const {
  if (n < 2) throw ConfigError("the number of recall thresholds n must be at least 2");
  if (!(dist_threshold > 0.0)) throw ConfigError("distance threshold must be positive");
}

ClassReport evaluate_single(std::span<const PredFrame> preds, std::span<const GroundTruthFrame> gt,
                            int cls, const Protocol& protocol) {
  protocol.validate();
  check_alignment(preds, gt);
  ClassReport rep;
  rep.cls = cls;
  for (const auto& f : gt) rep.num_gt += f.objects.size();
  if (rep.num_gt == 0) throw InputError("evaluation needs at least one ground-truth object");

  std::set<double, std::greater<>> floor_set;
  for (const auto& f : preds)
    for (const auto& p : f.objects) floor_set.insert(p.confidence);
  const std::vector<double> floors(floor_set.begin(), floor_set.end());

  std::vector<ErrorCounts> at_floor(floors.size());
  parallel_for(floors.size(), protocol.threads, [&](std::size_t i) {
    at_floor[i] = count_sequence_errors(preds, gt, floors[i], protocol.dist_threshold);
  });

  const double worst_motp = protocol.dist_threshold;
  const auto steps = static_cast<std::size_t>(protocol.n - 1);
  double amota_sum = 0.0;
  double amotp_sum = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    ThresholdRow row;
    row.recall_threshold = static_cast<double>(k) / static_cast<double>(steps);
    // recall >= k / steps  <=>  (P - FN) * steps >= k * P, evaluated exactly.
    for (std::size_t i = 0; i < floors.size(); ++i) {
      const auto& c = at_floor[i];
      if ((c.num_gt - c.fn) * steps >= k * c.num_gt) {
        row.confidence_floor = floors[i];
        row.achieved_recall = c.recall();
        row.motar = motar(c, c.recall(), c.num_gt);
        row.motp = c.motp(worst_motp);
        row.ids = c.ids;
        row.fp = c.fp;
        row.fn = c.fn;
        break;
      }
    }
    if (!row.confidence_floor) row.motp = worst_motp;
    amota_sum += row.motar;
    amotp_sum += row.motp;
    rep.thresholds.push_back(row);
  }
  rep.amota = amota_sum / static_cast<double>(steps);
  rep.amotp = amotp_sum / static_cast<double>(steps);

  // Classic metrics at the floor with the best MOTA (ties: higher floor).
  ErrorCounts best;
  if (floors.empty()) {
    best = count_sequence_errors(preds, gt, std::numeric_limits<double>::infinity(),
                                 protocol.dist_threshold);
  } else {
    std::size_t bi = 0;
    for (std::size_t i = 1; i < floors.size(); ++i)
      if (at_floor[i].mota() > at_floor[bi].mota()) bi = i;
    best = at_floor[bi];
  }
  rep.mota = best.mota();
  rep.motp = best.motp(worst_motp);
  rep.recall = best.recall();
  rep.ids = best.ids;
  rep.motar = best.recall() > 0.0 ? motar(best, best.recall(), best.num_gt) : 0.0;
  return rep;
}

MetricsReport amota(std::span<const PredFrame> preds, std::span<const GroundTruthFrame> gt,
                    const Protocol& protocol) {
  protocol.validate();
  check_alignment(preds, gt);
  std::set<int> present;
  for (const auto& f : gt)
    for (const auto& o : f.objects) present.insert(o.cls);
  if (present.empty()) throw InputError("evaluation needs at least one ground-truth object");

  std::vector<int> classes;
  if (protocol.classes) {
    for (int c : *protocol.classes)
      if (present.count(c) && std::find(classes.begin(), classes.end(), c) == classes.end())
        classes.push_back(c);
    std::sort(classes.begin(), classes.end());
  } else {
    classes.assign(present.begin(), present.end());
  }

  MetricsReport report;
  report.n = protocol.n;
  report.dist_threshold = protocol.dist_threshold;
  report.classes.resize(classes.size());

  Protocol inner = protocol;
  if (classes.size() > 1) inner.threads = 1;
  parallel_for(classes.size(), protocol.threads, [&](std::size_t i) {
    const int cls = classes[i];
    std::vector<PredFrame> p(preds.size());
    std::vector<GroundTruthFrame> g(gt.size());
    for (std::size_t f = 0; f < gt.size(); ++f) {
      p[f].frame_index = preds[f].frame_index;
      for (const auto& o : preds[f].objects)
        if (o.cls == cls) p[f].objects.push_back(o);
      g[f].frame_index = gt[f].frame_index;
      g[f].timestamp = gt[f].timestamp;
      for (const auto& o : gt[f].objects)
        if (o.cls == cls) g[f].objects.push_back(o);
    }
    report.classes[i] = evaluate_single(p, g, cls, inner);
  });

  auto& agg = report.aggregate;
  agg.cls = -1;
  if (!report.classes.empty()) {
    const double k = static_cast<double>(report.classes.size());
    for (const auto& c : report.classes) {
      agg.num_gt += c.num_gt;
      agg.ids += c.ids;
      agg.amota += c.amota / k;
      agg.amotp += c.amotp / k;
      agg.motar += c.motar / k;
      agg.mota += c.mota / k;
      agg.motp += c.motp / k;
      agg.recall += c.recall / k;
    }
  }
  return report;
}

}  // namespace radtrack::metrics
