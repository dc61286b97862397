#include "gradscan/geomcal.hpp"

#include <cmath>

#include <Eigen/LU>

#include "gradscan/error.hpp"

namespace gradscan::geomcal {

void RigidPose::validate(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) throw_invalid("pose holds non-finite values");
  if ((rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    throw_invalid("pose rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol) throw_invalid("pose rotation does not have det +1");
}

PlaneSpec PlaneSpec::from_normal(const Eigen::Vector3d& normal, double offset_mm) {
  const double len = normal.norm();
  if (!(len > 0.0) || !std::isfinite(len) || !std::isfinite(offset_mm)) throw_invalid("plane degenerate");
  return {normal / len, offset_mm};
}

void PlaneSpec::validate(double tol) const {
  if (!normal.allFinite() || !std::isfinite(offset_mm) || std::abs(normal.norm() - 1.0) > tol)
    throw_invalid("plane degenerate");
}

Eigen::Vector3d reflect_point(const PlaneSpec& plane, const Eigen::Vector3d& x) {
  plane.validate();
  return x - 2.0 * (plane.normal.dot(x) - plane.offset_mm) * plane.normal;
}

RigidPose unreflect_pose(const PlaneSpec& plane, const RigidPose& virtual_pose) {
  plane.validate();
  virtual_pose.validate();
  const Eigen::Matrix3d householder =
      Eigen::Matrix3d::Identity() - 2.0 * plane.normal * plane.normal.transpose();
  const Eigen::Matrix3d flip = Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal();
  return {householder * virtual_pose.rotation * flip, reflect_point(plane, virtual_pose.translation)};
}

}  // namespace gradscan::geomcal
