#include <Eigen/LU>
#include <Eigen/SVD>

#include "gradscan/error.hpp"
#include "gradscan/geomcal.hpp"
#include "gradscan/png_io.hpp"

namespace gradscan::geomcal {

using nlohmann::json;

namespace {

Eigen::Matrix3d matrix_from_json(const json& doc, const char* what) {
  Eigen::Matrix3d m;
  if (doc.is_array() && doc.size() == 9) {
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = doc[static_cast<std::size_t>(i)].get<double>();
    return m;
  }
  if (doc.is_array() && doc.size() == 3) {
    for (int r = 0; r < 3; ++r) {
      const auto& row = doc[static_cast<std::size_t>(r)];
      if (!row.is_array() || row.size() != 3) break;
      for (int c = 0; c < 3; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      if (r == 2) return m;
    }
  }
  throw_invalid(std::string(what) + " must be a 3x3 row-major matrix");
}

Eigen::Vector3d vector_from_json(const json& doc, const char* what) {
  if (!doc.is_array() || doc.size() != 3) throw_invalid(std::string(what) + " must hold 3 numbers");
  return {doc[0].get<double>(), doc[1].get<double>(), doc[2].get<double>()};
}

json matrix_to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace

json pose_to_json(const RigidPose& pose) {
  return {{"rotation", matrix_to_json(pose.rotation)},
          {"translation_mm", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

RigidPose pose_from_json(const json& doc, double tol) {
  RigidPose pose;
  try {
    pose.rotation = matrix_from_json(doc.at("rotation"), "rotation");
    pose.translation = vector_from_json(doc.at("translation_mm"), "translation_mm");
  } catch (const json::exception&) {
    throw_invalid("pose must hold rotation and translation_mm");
  }
  pose.validate(tol);
  return pose;
}

CalibrationInput calibration_from_json(const json& doc) {
  CalibrationInput in;
  try {
    in.camera_matrix = matrix_from_json(doc.at("camera_matrix"), "camera_matrix");
    const auto& plane = doc.at("mirror_plane");
    in.mirror_plane = PlaneSpec::from_normal(vector_from_json(plane.at("normal"), "mirror_plane.normal"),
                                             plane.at("offset_mm").get<double>());
    in.virtual_screen_pose = pose_from_json(doc.at("virtual_screen_pose"), 1e-6);
  } catch (const json::exception& e) {
    throw_invalid(std::string("calibration JSON: ") + e.what());
  }
  in.virtual_screen_pose.rotation = nearest_rotation(in.virtual_screen_pose.rotation);
  return in;
}

CalibrationInput read_calibration(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error&) {
    throw_invalid("calibration file '" + path.string() + "' is not valid JSON");
  }
  return calibration_from_json(doc);
}

}  // namespace gradscan::geomcal
