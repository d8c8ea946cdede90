#include "radtrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "radtrack/error.hpp"

namespace radtrack {

void Detection::validate() const {
  const bool finite = std::isfinite(center.u) && std::isfinite(center.v) && std::isfinite(depth) &&
                      std::isfinite(vx) && std::isfinite(vy) && std::isfinite(confidence) &&
                      std::isfinite(displacement.du) && std::isfinite(displacement.dv);
  if (!finite) throw InputError("detection has non-finite fields");
  if (!(depth > 0.0)) throw InputError("detection depth must be positive");
  if (confidence < 0.0 || confidence > 1.0) throw InputError("detection confidence outside [0, 1]");
}

void CostWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(delta >= 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta) || !std::isfinite(delta))
    throw ConfigError("cost weights must be finite and non-negative");
  if (!(alpha > 0.0 || beta > 0.0 || delta > 0.0))
    throw ConfigError("at least one cost weight must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("gate radius must be positive");
}

double pairwise_cost(const Detection& det, const Track& trk, const CostWeights& w) {
  if (det.cls != trk.cls) return std::numeric_limits<double>::infinity();
  const double du = det.center.u - trk.center.u;
  const double dv = det.center.v - trk.center.v;
  const double dd = det.depth - trk.depth;
  const double dvx = det.vx - trk.vx;
  const double dvy = det.vy - trk.vy;
  return w.alpha * (du * du + dv * dv) + w.beta * (dd * dd) + w.delta * (dvx * dvx + dvy * dvy);
}

bool in_gate(const Detection& det, const Track& trk, double radius) {
  const Pixel g = det.gated_position();
  const double du = trk.center.u - g.u;
  const double dv = trk.center.v - g.v;
  return du * du + dv * dv <= radius * radius;
}

double AssociationResult::total_cost() const {
  double sum = 0.0;
  for (const auto& m : matches) sum += m.cost;
  return sum;
}

AssociationResult greedy_associate(std::span<const Detection> dets, std::span<const Track> tracks,
                                   const CostWeights& w) {
  w.validate();
  {
    std::unordered_set<TrackId> seen;
    seen.reserve(tracks.size());
    for (const auto& t : tracks)
      if (!seen.insert(t.id).second) throw InputError("duplicate track id " + std::to_string(t.id));
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  AssociationResult out;
  std::vector<bool> taken(tracks.size(), false);
  for (std::size_t di : order) {
    const Detection& det = dets[di];
    std::size_t best = tracks.size();
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
      if (taken[ti] || !in_gate(det, tracks[ti], w.radius)) continue;
      const double c = pairwise_cost(det, tracks[ti], w);
      if (!std::isfinite(c)) continue;
      if (c < best_cost || (c == best_cost && best < tracks.size() && tracks[ti].id < tracks[best].id)) {
        best = ti;
        best_cost = c;
      }
    }
    if (best == tracks.size()) {
      out.unmatched_dets.push_back(di);
    } else {
      taken[best] = true;
      out.matches.push_back({di, tracks[best].id, best_cost});
    }
  }
  for (std::size_t ti = 0; ti < tracks.size(); ++ti)
    if (!taken[ti]) out.unmatched_tracks.push_back(tracks[ti].id);
  std::sort(out.unmatched_tracks.begin(), out.unmatched_tracks.end());
  return out;
}

}  // namespace radtrack
