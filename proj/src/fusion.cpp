#include "radtrack/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "radtrack/error.hpp"

namespace radtrack {

void PillarDims::validate() const {
  if (!(width_y > 0.0) || !(height_z > 0.0) || !(depth_x > 0.0))
    throw ConfigError("pillar dimensions must be positive");
}

void FusionParams::validate() const {
  if (!(depth_tolerance > 0.0 && depth_tolerance < 1.0))
    throw ConfigError("frustum depth tolerance must lie in (0, 1)");
}

std::array<VehiclePoint, 8> Pillar::corners() const {
  const auto& p = base.position;
  const double hx = 0.5 * dims.depth_x;
  const double hy = 0.5 * dims.width_y;
  std::array<VehiclePoint, 8> out;
  std::size_t k = 0;
  for (double dz : {0.0, dims.height_z})
    for (double dy : {-hy, hy})
      for (double dx : {-hx, hx}) out[k++] = {p.x + dx, p.y + dy, p.z + dz};
  return out;
}

std::vector<Pillar> expand_pillars(std::span<const RadarPoint> points, const PillarDims& dims) {
  dims.validate();
  std::vector<Pillar> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({p, dims});
  return out;
}

Frustum build_frustum(const PreliminaryDetection& det, const CameraModel& cam,
                      double depth_tolerance) {
  if (!(depth_tolerance > 0.0 && depth_tolerance < 1.0))
    throw ConfigError("frustum depth tolerance must lie in (0, 1)");
  const auto& b = det.bbox;
  if (!std::isfinite(b.u_min) || !std::isfinite(b.u_max) || !std::isfinite(b.v_min) ||
      !std::isfinite(b.v_max) || !(b.u_min < b.u_max) || !(b.v_min < b.v_max))
    throw InputError("degenerate detection box");
  if (!(det.est_depth > 0.0) || !std::isfinite(det.est_depth))
    throw InputError("detection depth must be positive");

  Frustum f;
  f.bbox = b;
  f.origin = cam.center();
  f.corner_rays = {backproject_ray({b.u_min, b.v_min}, cam), backproject_ray({b.u_max, b.v_min}, cam),
                   backproject_ray({b.u_max, b.v_max}, cam), backproject_ray({b.u_min, b.v_max}, cam)};
  f.depth_min = det.est_depth * (1.0 - depth_tolerance);
  f.depth_max = det.est_depth * (1.0 + depth_tolerance);
  return f;
}

bool Frustum::contains(const Pillar& pillar, const CameraModel& cam) const {
  const auto base = project_unbounded(pillar.base.position, cam);
  if (!base || base->depth < depth_min || base->depth > depth_max) return false;
  if (bbox.contains(base->u, base->v)) return true;
  for (const auto& c : pillar.corners()) {
    const auto ip = project_unbounded(c, cam);
    if (ip && bbox.contains(ip->u, ip->v)) return true;
  }
  return false;
}

namespace {

struct ProjectedPillar {
  std::size_t index = 0;
  double depth = 0.0;
  std::array<Pixel, 9> points;
  std::size_t num_points = 0;
};

auto canonical_key(const ProjectedPillar& p, std::span<const Pillar> pillars) {
  const auto& b = pillars[p.index].base;
  return std::make_tuple(p.depth, b.position.x, b.position.y, b.position.z, b.vx, b.vy, p.index);
}

}  // namespace

std::vector<std::optional<FusedMeasurement>> frustum_associate(
    std::span<const PreliminaryDetection> dets, std::span<const Pillar> pillars,
    const CameraModel& cam, const FusionParams& params) {
  params.validate();

  std::vector<ProjectedPillar> projected;
  projected.reserve(pillars.size());
  for (std::size_t i = 0; i < pillars.size(); ++i) {
    const auto base = project_unbounded(pillars[i].base.position, cam);
    if (!base) continue;
    ProjectedPillar pp;
    pp.index = i;
    pp.depth = base->depth;
    pp.points[pp.num_points++] = base->pixel();
    for (const auto& c : pillars[i].corners()) {
      if (auto ip = project_unbounded(c, cam)) pp.points[pp.num_points++] = ip->pixel();
    }
    projected.push_back(pp);
  }
  std::sort(projected.begin(), projected.end(),
            [&](const ProjectedPillar& a, const ProjectedPillar& b) {
              return canonical_key(a, pillars) < canonical_key(b, pillars);
            });

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (params.exclusive) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dets[a].confidence > dets[b].confidence;
    });
  }

  std::vector<std::optional<FusedMeasurement>> out(dets.size());
  std::vector<bool> used(projected.size(), false);
  for (std::size_t di : order) {
    const Frustum f = build_frustum(dets[di], cam, params.depth_tolerance);
    auto it = std::lower_bound(projected.begin(), projected.end(), f.depth_min,
                               [](const ProjectedPillar& p, double d) { return p.depth < d; });
    for (; it != projected.end() && it->depth <= f.depth_max; ++it) {
      const auto slot = static_cast<std::size_t>(it - projected.begin());
      if (used[slot]) continue;
      const bool inside = std::any_of(it->points.begin(), it->points.begin() + it->num_points,
                                      [&](const Pixel& px) { return f.bbox.contains(px.u, px.v); });
      if (!inside) continue;
      const auto& base = pillars[it->index].base;
      out[di] = FusedMeasurement{it->depth, base.vx, base.vy, it->index};
      if (params.exclusive) used[slot] = true;
      break;
    }
  }
  return out;
}

}  // namespace radtrack
