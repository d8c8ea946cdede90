#pragma once

// Small random-instance builders shared by the property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "radtrack/association.hpp"
#include "radtrack/metrics.hpp"

namespace radtrack::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return rng_; }

  Detection detection(int num_classes = 2) {
    Detection d;
    d.center = {real(0, 800), real(0, 448)};
    d.depth = real(2, 60);
    d.vx = real(-10, 10);
    d.vy = real(-10, 10);
    d.cls = integer(0, num_classes - 1);
    d.confidence = real(0.3, 1.0);
    d.displacement = {real(-15, 15), real(-15, 15)};
    return d;
  }

  // A track placed near `d`'s gated position so that gating usually passes.
  Track track_near(const Detection& d, TrackId id, double spread) {
    Track t;
    t.id = id;
    const Pixel g = d.gated_position();
    t.center = {g.u + real(-spread, spread), g.v + real(-spread, spread)};
    t.depth = d.depth + real(-3, 3);
    if (t.depth <= 0.1) t.depth = 0.1;
    t.vx = d.vx + real(-2, 2);
    t.vy = d.vy + real(-2, 2);
    t.cls = coin(0.85) ? d.cls : 1 - d.cls;
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

// Random ground truth / prediction sequence small enough for the exhaustive recount.
struct MicroScene {
  std::vector<metrics::PredFrame> preds;
  std::vector<metrics::GroundTruthFrame> gt;
};

inline MicroScene micro_scene(Gen& g) {
  MicroScene s;
  const int frames = g.integer(1, 10);
  const int objects = g.integer(1, 4);
  std::vector<double> x(objects), y(objects), vx(objects), vy(objects);
  for (int i = 0; i < objects; ++i) {
    x[i] = g.real(0, 12);
    y[i] = g.real(-6, 6);
    vx[i] = g.real(-1.5, 1.5);
    vy[i] = g.real(-1.5, 1.5);
  }
  const int max_track = 6;
  for (int f = 0; f < frames; ++f) {
    metrics::GroundTruthFrame gf{f, 0.1 * f, {}};
    metrics::PredFrame pf{f, {}};
    std::vector<bool> used(max_track + 1, false);
    for (int i = 0; i < objects; ++i) {
      const double ox = x[i] + vx[i] * f, oy = y[i] + vy[i] * f;
      const int cls = i % 2 == 0 ? 0 : g.integer(0, 1);
      if (g.coin(0.9)) gf.objects.push_back({i + 1, ox, oy, cls});
      if (g.coin(0.8)) {
        int id = g.coin(0.75) ? i + 1 : g.integer(1, max_track);
        if (used[id]) continue;
        used[id] = true;
        pf.objects.push_back({static_cast<TrackId>(id), ox + g.real(-2.0, 2.0), oy + g.real(-2.0, 2.0),
                              g.coin(0.9) ? cls : 1 - cls, std::round(g.real(0.1, 1.0) * 4) / 4});
      }
    }
    if (g.coin(0.3)) {
      int id = g.integer(1, max_track);
      if (!used[id] && pf.objects.size() < 8)
        pf.objects.push_back({static_cast<TrackId>(id), g.real(0, 12), g.real(-6, 6), 0, g.real(0.1, 1.0)});
    }
    s.gt.push_back(gf);
    s.preds.push_back(pf);
  }
  return s;
}

}  // namespace radtrack::testing
