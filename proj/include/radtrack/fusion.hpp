#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "radtrack/geometry.hpp"

namespace radtrack {

/// Radar return in the vehicle frame with its radial velocity components (m/s).
struct RadarPoint {
  VehiclePoint position;
  double vx = 0.0;
  double vy = 0.0;
  bool operator==(const RadarPoint&) const = default;
};

/// Pillar extents in meters.
struct PillarDims {
  double width_y = 0.5;
  double height_z = 1.5;
  double depth_x = 0.5;

  void validate() const;
};

/// Radar point expanded to a box: centered on the point in x and y, grounded
/// at the point in z and extending `height_z` upwards.
struct Pillar {
  RadarPoint base;
  PillarDims dims;

  std::array<VehiclePoint, 8> corners() const;
};

std::vector<Pillar> expand_pillars(std::span<const RadarPoint> points, const PillarDims& dims);

/// Image-space detection box with an estimated depth, before radar fusion.
struct PreliminaryDetection {
  BoundingBox bbox;
  double est_depth = 1.0;
  int cls = 0;
  /// Only used to order detections in exclusive mode.
  double confidence = 1.0;
};

/// Viewing frustum of a detection box, limited to a depth window.
struct Frustum {
  BoundingBox bbox;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  /// Rays through (u_min,v_min), (u_max,v_min), (u_max,v_max), (u_min,v_max).
  std::array<Eigen::Vector3d, 4> corner_rays;
  double depth_min = 0.0;
  double depth_max = 0.0;

  /// A pillar is inside when any of its eight corners or its base point
  /// projects into the box and its base depth lies in [depth_min, depth_max].
  bool contains(const Pillar& pillar, const CameraModel& cam) const;
};

/// Depth window is est_depth * (1 -/+ depth_tolerance).
Frustum build_frustum(const PreliminaryDetection& det, const CameraModel& cam,
                      double depth_tolerance);

struct FusionParams {
  double depth_tolerance = 0.25;
  /// When set, each pillar serves at most one detection (highest confidence first).
  bool exclusive = false;

  void validate() const;
};

/// Radar values adopted by a detection.
struct FusedMeasurement {
  double depth = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  std::size_t pillar_index = 0;
};

/// For every detection, the inside pillar with the smallest base depth, or
/// nullopt. Depth ties resolve on (x, y, z, vx, vy) and then input index.
std::vector<std::optional<FusedMeasurement>> frustum_associate(
    std::span<const PreliminaryDetection> dets, std::span<const Pillar> pillars,
    const CameraModel& cam, const FusionParams& params);

}  // namespace radtrack
