#include "radtrack/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "radtrack/error.hpp"

namespace radtrack {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min);
  const double ih = std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

RigidTransform RigidTransform::compose(const RigidTransform& first) const {
  return {rotation * first.rotation, rotation * first.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation.transpose();
  return {rt, -rt * translation};
}

bool RigidTransform::is_orthonormal(double tol) const {
  const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Eigen::Matrix3d vehicle_to_optical() {
  Eigen::Matrix3d r;
  r << 0, -1, 0,
       0, 0, -1,
       1, 0, 0;
  return r;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("camera focal lengths must be positive");
  if (image_width <= 0 || image_height <= 0) throw ConfigError("camera image size must be positive");
  if (!(cx > 0.0 && cx < image_width) || !(cy > 0.0 && cy < image_height))
    throw ConfigError("camera principal point must lie strictly inside the image");
  if (!extrinsic.rotation.allFinite() || !extrinsic.translation.allFinite())
    throw ConfigError("camera extrinsic must be finite");
  if (!extrinsic.is_orthonormal()) throw ConfigError("camera rotation is not orthonormal");
}

Eigen::Vector3d CameraModel::center() const {
  return -extrinsic.rotation.transpose() * extrinsic.translation;
}

CameraModel CameraModel::forward_facing(double fx, double fy, double cx, double cy, int width,
                                        int height, const VehiclePoint& mount) {
  CameraModel cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.image_width = width;
  cam.image_height = height;
  cam.extrinsic.rotation = vehicle_to_optical();
  cam.extrinsic.translation = -cam.extrinsic.rotation * mount.vec();
  return cam;
}

CameraModel CameraModel::standard() {
  return forward_facing(700.0, 700.0, 400.0, 224.0, 800, 448, {0.0, 0.0, 1.0});
}

std::optional<ImagePoint> project_unbounded(const VehiclePoint& p, const CameraModel& cam) {
  const Eigen::Vector3d pc = cam.extrinsic.apply(p.vec());
  if (!(pc.z() > 0.0)) return std::nullopt;
  return ImagePoint{cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy, pc.z()};
}

std::optional<ImagePoint> project_to_image(const VehiclePoint& p, const CameraModel& cam) {
  auto ip = project_unbounded(p, cam);
  if (!ip) return std::nullopt;
  if (ip->u < 0.0 || ip->u > cam.image_width || ip->v < 0.0 || ip->v > cam.image_height)
    return std::nullopt;
  return ip;
}

Eigen::Vector3d backproject_ray(const Pixel& px, const CameraModel& cam) {
  const Eigen::Vector3d dir_cam((px.u - cam.cx) / cam.fx, (px.v - cam.cy) / cam.fy, 1.0);
  return (cam.extrinsic.rotation.transpose() * dir_cam).normalized();
}

VehiclePoint backproject_at_depth(const Pixel& px, double depth, const CameraModel& cam) {
  const Eigen::Vector3d pc((px.u - cam.cx) / cam.fx * depth, (px.v - cam.cy) / cam.fy * depth,
                           depth);
  return VehiclePoint::from(cam.extrinsic.inverse().apply(pc));
}

}  // namespace radtrack
