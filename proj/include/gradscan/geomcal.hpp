#pragma once

#include <filesystem>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace gradscan::geomcal {

/// Proper rigid transform x_cam = rotation * x_obj + translation (mm).
struct RigidPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Throws Error(validation) unless R^T R = I and det R = +1 within `tol`.
  void validate(double tol = 1e-9) const;
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation * x + translation; }
};

/// Plane {x : normal . x = offset_mm} with a unit normal.
struct PlaneSpec {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset_mm = 0.0;

  /// Normalizes `normal`; throws for zero-length or non-finite input.
  static PlaneSpec from_normal(const Eigen::Vector3d& normal, double offset_mm);
  void validate(double tol = 1e-9) const;
};

/// Householder reflection across the plane: x - 2 (m.x - d) m.
Eigen::Vector3d reflect_point(const PlaneSpec& plane, const Eigen::Vector3d& x);

/// Real screen pose from the pose of its mirror image: translation reflected
/// across the plane, rotation H R F with H = I - 2 m m^T and F = diag(1,1,-1)
/// restoring det +1. The map is its own inverse.
RigidPose unreflect_pose(const PlaneSpec& plane, const RigidPose& virtual_pose);

/// Calibration ingest: camera intrinsics plus externally detected mirror
/// plane and mirrored screen pose.
struct CalibrationInput {
  Eigen::Matrix3d camera_matrix = Eigen::Matrix3d::Identity();
  PlaneSpec mirror_plane;
  RigidPose virtual_screen_pose;
};

/// Parses {camera_matrix, mirror_plane: {normal, offset_mm},
/// virtual_screen_pose: {rotation, translation_mm}}. Matrices may be nested
/// rows or 9 numbers row-major. Detected rotations within 1e-6 of orthonormal
/// are re-projected onto SO(3).
CalibrationInput calibration_from_json(const nlohmann::json& doc);
CalibrationInput read_calibration(const std::filesystem::path& path);

nlohmann::json pose_to_json(const RigidPose& pose);
RigidPose pose_from_json(const nlohmann::json& doc, double tol = 1e-9);

}  // namespace gradscan::geomcal
