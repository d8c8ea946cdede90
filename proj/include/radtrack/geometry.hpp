#pragma once

#include <optional>

#include <Eigen/Dense>

namespace radtrack {

/// Point in the vehicle frame, meters: x forward, y left, z up.
struct VehiclePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static VehiclePoint from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
  bool operator==(const VehiclePoint&) const = default;
};

/// Continuous pixel coordinates.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
  bool operator==(const Pixel&) const = default;
};

/// Projected point: pixel coordinates plus depth along the camera optical axis (m).
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;

  Pixel pixel() const { return {u, v}; }
};

/// Axis-aligned image box, pixels.
struct BoundingBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  bool contains(double u, double v) const {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
  double area() const { return (u_max - u_min) * (v_max - v_min); }
  Pixel center() const { return {0.5 * (u_min + u_max), 0.5 * (v_min + v_max)}; }
  bool operator==(const BoundingBox&) const = default;
};

/// Intersection over union; 0 when either box is empty.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Rigid transform p' = rotation * p + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  /// (*this) after `first`: maps p to this->apply(first.apply(p)).
  RigidTransform compose(const RigidTransform& first) const;
  RigidTransform inverse() const;
  bool is_orthonormal(double tol = 1e-9) const;
};

/// Ideal pinhole camera.
///
/// Camera frame follows the usual optical convention: x right, y down, z along
/// the optical axis. `extrinsic` maps vehicle-frame points into that frame, so
/// a camera looking along vehicle +x has rotation rows (0,-1,0), (0,0,-1),
/// (1,0,0); see `forward_facing`. Depth everywhere in this library means the
/// camera-frame z coordinate, not Euclidean range.
struct CameraModel {
  double fx = 700.0;
  double fy = 700.0;
  double cx = 400.0;
  double cy = 224.0;
  RigidTransform extrinsic;
  int image_width = 800;
  int image_height = 448;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;

  /// Camera center expressed in the vehicle frame.
  Eigen::Vector3d center() const;

  /// Camera looking along vehicle +x, mounted at `mount` (vehicle frame).
  static CameraModel forward_facing(double fx, double fy, double cx, double cy, int width,
                                    int height, const VehiclePoint& mount);

  /// Default 800x448 forward camera mounted 1 m above the vehicle origin.
  static CameraModel standard();
};

/// Rotation that remaps vehicle axes onto optical axes (x fwd -> z, y left -> -x, z up -> -y).
Eigen::Matrix3d vehicle_to_optical();

/// Pinhole projection with positive depth; nullopt when behind the camera or
/// outside the closed image bounds [0, width] x [0, height].
std::optional<ImagePoint> project_to_image(const VehiclePoint& p, const CameraModel& cam);

/// Like project_to_image but without the image-bounds test.
std::optional<ImagePoint> project_unbounded(const VehiclePoint& p, const CameraModel& cam);

/// Unit direction (vehicle frame) of the ray through `px`, starting at cam.center().
Eigen::Vector3d backproject_ray(const Pixel& px, const CameraModel& cam);

/// Vehicle-frame point at pixel `px` with camera-axis depth `depth`.
VehiclePoint backproject_at_depth(const Pixel& px, double depth, const CameraModel& cam);

}  // namespace radtrack
