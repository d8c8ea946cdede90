#include "radtrack/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>

#include "radtrack/error.hpp"

namespace radtrack::oracle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  CostMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw InputError("cost matrix rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

double assignment_cost(const CostMatrix& m,
                       std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (const auto& [r, c] : sorted) sum += m(r, c);
  return sum;
}

namespace {

// Best matching for every cardinality, by exhaustive enumeration.
std::vector<std::optional<Assignment>> enumerate_all(const CostMatrix& m) {
  if (m.rows() > kExhaustiveLimit || m.cols() > kExhaustiveLimit)
    throw InputError("exhaustive assignment is limited to 10 x 10");
  std::vector<std::optional<Assignment>> best(std::min(m.rows(), m.cols()) + 1);
  std::vector<bool> col_used(m.cols(), false);
  std::vector<std::pair<std::size_t, std::size_t>> current;

  std::function<void(std::size_t, double)> visit = [&](std::size_t row, double cost) {
    if (row == m.rows()) {
      auto& slot = best[current.size()];
      if (!slot || cost < slot->total_cost) slot = Assignment{cost, current};
      return;
    }
    visit(row + 1, cost);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (col_used[c] || !std::isfinite(m(row, c))) continue;
      col_used[c] = true;
      current.emplace_back(row, c);
      visit(row + 1, cost + m(row, c));
      current.pop_back();
      col_used[c] = false;
    }
  };
  visit(0, 0.0);
  return best;
}

// Successive shortest augmenting paths on source -> rows -> cols -> sink.
// Stops after `limit` augmentations or when no augmenting path remains.
Assignment successive_shortest_paths(const CostMatrix& m, std::size_t limit) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  const std::size_t source = 0;
  const std::size_t sink = rows + cols + 1;
  const std::size_t n = rows + cols + 2;

  double shift = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (std::isfinite(m(r, c))) shift = std::min(shift, m(r, c));

  struct Edge {
    std::size_t to;
    std::size_t rev;
    int cap;
    double cost;
  };
  std::vector<std::vector<Edge>> g(n);
  auto add = [&](std::size_t a, std::size_t b, double cost) {
    g[a].push_back({b, g[b].size(), 1, cost});
    g[b].push_back({a, g[a].size() - 1, 0, -cost});
  };
  for (std::size_t r = 0; r < rows; ++r) add(source, 1 + r, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (std::isfinite(m(r, c))) add(1 + r, 1 + rows + c, m(r, c) - shift);
  for (std::size_t c = 0; c < cols; ++c) add(1 + rows + c, sink, 0.0);

  std::vector<double> potential(n, 0.0);
  std::size_t flow = 0;
  while (flow < limit) {
    std::vector<double> dist(n, kInf);
    std::vector<std::pair<std::size_t, std::size_t>> parent(n, {n, 0});
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
      const auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v]) continue;
      for (std::size_t ei = 0; ei < g[v].size(); ++ei) {
        const Edge& e = g[v][ei];
        if (e.cap <= 0) continue;
        const double nd = d + e.cost + potential[v] - potential[e.to];
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          parent[e.to] = {v, ei};
          pq.push({nd, e.to});
        }
      }
    }
    if (!std::isfinite(dist[sink])) break;
    for (std::size_t v = 0; v < n; ++v)
      if (std::isfinite(dist[v])) potential[v] += dist[v];
    for (std::size_t v = sink; v != source; v = parent[v].first) {
      Edge& e = g[parent[v].first][parent[v].second];
      e.cap -= 1;
      g[e.to][e.rev].cap += 1;
    }
    ++flow;
  }

  Assignment out;
  for (std::size_t r = 0; r < rows; ++r)
    for (const Edge& e : g[1 + r])
      if (e.to > rows && e.to <= rows + cols && e.cap == 0) out.pairs.emplace_back(r, e.to - 1 - rows);
  out.total_cost = assignment_cost(m, out.pairs);
  return out;
}

}  // namespace

Assignment optimal_assignment(const CostMatrix& m) {
  auto best = enumerate_all(m);
  for (auto it = best.rbegin(); it != best.rend(); ++it)
    if (*it) return **it;
  return {};
}

std::optional<Assignment> optimal_assignment_of_size(const CostMatrix& m, std::size_t k) {
  auto best = enumerate_all(m);
  if (k >= best.size()) return std::nullopt;
  return best[k];
}

Assignment min_cost_matching(const CostMatrix& m) {
  return successive_shortest_paths(m, std::numeric_limits<std::size_t>::max());
}

std::optional<Assignment> min_cost_matching_of_size(const CostMatrix& m, std::size_t k) {
  Assignment a = successive_shortest_paths(m, k);
  if (a.size() != k) return std::nullopt;
  return a;
}

CostMatrix build_cost_matrix(std::span<const Detection> dets, std::span<const Track> tracks,
                             const CostWeights& w) {
  CostMatrix m(dets.size(), tracks.size(), kInf);
  for (std::size_t d = 0; d < dets.size(); ++d)
    for (std::size_t t = 0; t < tracks.size(); ++t)
      if (in_gate(dets[d], tracks[t], w.radius)) m(d, t) = pairwise_cost(dets[d], tracks[t], w);
  return m;
}

std::vector<std::pair<std::size_t, std::size_t>> greedy_pairs(const AssociationResult& result,
                                                              std::span<const Track> tracks) {
  std::unordered_map<TrackId, std::size_t> column;
  for (std::size_t i = 0; i < tracks.size(); ++i) column.emplace(tracks[i].id, i);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& mt : result.matches) out.emplace_back(mt.det_index, column.at(mt.track_id));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using metrics::GroundTruthFrame;
using metrics::PredObject;

struct Edge {
  std::size_t gt;
  std::size_t pred;
  double distance;
  bool sticky;
};

using Key = std::tuple<double, std::int64_t, TrackId>;

// Sorted protocol keys of a set of edges.
std::vector<Key> keys_of(const std::vector<Edge>& edges, const GroundTruthFrame& g,
                         const std::vector<PredObject>& p) {
  std::vector<Key> k;
  for (const auto& e : edges) k.emplace_back(e.distance, g.objects[e.gt].id, p[e.pred].id);
  std::sort(k.begin(), k.end());
  return k;
}

// True when no edge of `pool` could be added to `chosen` given the endpoints
// already occupied by `chosen` and `blocked`.
bool maximal_in(const std::vector<Edge>& chosen, const std::vector<Edge>& pool,
                const std::vector<Edge>& blocked) {
  for (const auto& e : pool) {
    bool free = true;
    for (const auto* set : {&chosen, &blocked})
      for (const auto& c : *set)
        if (c.gt == e.gt || c.pred == e.pred) free = false;
    if (free) return false;
  }
  return true;
}

}  // namespace

metrics::ErrorCounts recount_metrics(std::span<const metrics::PredFrame> preds,
                                     std::span<const metrics::GroundTruthFrame> gt,
                                     double confidence_floor, double dist_threshold) {
  if (gt.size() > kRecountMaxFrames) throw InputError("recount is limited to 10 frames");
  if (preds.size() != gt.size()) throw InputError("recount: frame counts differ");
  std::set<std::int64_t> ids;
  for (const auto& f : gt)
    for (const auto& o : f.objects) ids.insert(o.id);
  if (ids.size() > kRecountMaxObjects) throw InputError("recount is limited to 4 objects");

  metrics::ErrorCounts counts;
  counts.confidence_floor = confidence_floor;
  std::map<std::int64_t, TrackId> last;  // gt id -> track id of its latest match

  for (std::size_t f = 0; f < gt.size(); ++f) {
    if (preds[f].frame_index != gt[f].frame_index) throw InputError("recount: frames misaligned");
    const auto& g = gt[f];
    std::vector<PredObject> p;
    for (const auto& o : preds[f].objects)
      if (o.confidence >= confidence_floor) p.push_back(o);
    if (p.size() > kRecountMaxPredsPerFrame) throw InputError("recount is limited to 8 predictions per frame");

    std::vector<Edge> eligible;
    for (std::size_t gi = 0; gi < g.objects.size(); ++gi)
      for (std::size_t pi = 0; pi < p.size(); ++pi) {
        if (p[pi].cls != g.objects[gi].cls) continue;
        const double d = std::hypot(p[pi].x - g.objects[gi].x, p[pi].y - g.objects[gi].y);
        if (d > dist_threshold) continue;
        const auto it = last.find(g.objects[gi].id);
        eligible.push_back({gi, pi, d, it != last.end() && it->second == p[pi].id});
      }

    // Every matching over eligible edges.
    std::vector<std::vector<Edge>> all;
    std::vector<Edge> cur;
    std::vector<bool> pred_used(p.size(), false);
    std::function<void(std::size_t)> rec = [&](std::size_t gi) {
      if (gi == g.objects.size()) {
        all.push_back(cur);
        return;
      }
      rec(gi + 1);
      for (const auto& e : eligible) {
        if (e.gt != gi || pred_used[e.pred]) continue;
        pred_used[e.pred] = true;
        cur.push_back(e);
        rec(gi + 1);
        cur.pop_back();
        pred_used[e.pred] = false;
      }
    };
    rec(0);

    std::vector<Edge> sticky_pool;
    for (const auto& e : eligible)
      if (e.sticky) sticky_pool.push_back(e);

    // Stage 1: the sticky part must be the lexicographically smallest maximal
    // matching of the sticky edges. Stage 2: the rest must be the smallest
    // maximal matching of the remaining edges.
    auto split = [](const std::vector<Edge>& mt) {
      std::vector<Edge> s, r;
      for (const auto& e : mt) (e.sticky ? s : r).push_back(e);
      return std::pair{s, r};
    };
    std::optional<std::vector<Key>> best_sticky;
    for (const auto& mt : all) {
      const auto [s, r] = split(mt);
      if (!maximal_in(s, sticky_pool, {})) continue;
      const auto k = keys_of(s, g, p);
      if (!best_sticky || k < *best_sticky) best_sticky = k;
    }
    const std::vector<Edge>* chosen = nullptr;
    std::optional<std::vector<Key>> best_rest;
    for (const auto& mt : all) {
      const auto [s, r] = split(mt);
      if (keys_of(s, g, p) != *best_sticky) continue;
      if (!maximal_in(r, eligible, s)) continue;
      const auto k = keys_of(r, g, p);
      if (!best_rest || k < *best_rest) {
        best_rest = k;
        chosen = &mt;
      }
    }

    std::vector<Edge> matched = *chosen;
    std::sort(matched.begin(), matched.end(), [&](const Edge& a, const Edge& b) {
      return g.objects[a.gt].id < g.objects[b.gt].id;
    });
    counts.num_gt += g.objects.size();
    counts.fn += g.objects.size() - matched.size();
    counts.fp += p.size() - matched.size();
    for (const auto& e : matched) {
      const auto gid = g.objects[e.gt].id;
      const auto tid = p[e.pred].id;
      const auto it = last.find(gid);
      if (it != last.end() && it->second != tid) ++counts.ids;
      last[gid] = tid;
      counts.distances.push_back(e.distance);
    }
  }
  return counts;
}

}  // namespace radtrack::oracle
