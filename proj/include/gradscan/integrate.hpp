#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gradscan/image.hpp"
#include "gradscan/normals.hpp"

namespace gradscan::integrate {

/// Surface gradient field p = dz/dx, q = dz/dy (height units per length unit).
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> p;
  std::vector<double> q;
  ValidityMask mask;

  GradientField() = default;
  GradientField(int w, int h);
};

/// Height field on the pixel grid, mean-centered over valid pixels.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> z;
  /// Millimetres per pixel; 1.0 when the depth is only relative.
  double pixel_pitch_mm = 1.0;
  /// False when no physical pitch was supplied (depth in pixel-pitch units).
  bool metric = false;
  ValidityMask mask;

  double at(int row, int col) const {
    return z[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
  }
};

/// p = -n_x / max(n_z, eps_nz), q = -n_y / max(n_z, eps_nz); pixels with
/// n_z < eps_nz are dropped from the mask.
GradientField gradients_from_normals(const normals::NormalMap& nm, double eps_nz = 0.05);

/// Frankot-Chellappa least-squares integration.
///
/// The field is extended by even reflection of the underlying surface to
/// 2W x 2H (the normal gradient component flips sign across each mirror
/// axis), which removes the periodic-boundary seam. Projection uses the
/// discrete forward-difference symbol with trapezoid-averaged gradients, so
/// constant and quadratic-surface fields integrate exactly. Invalid pixels
/// contribute zero gradient and are masked again in the output; DC is zero.
/// `pixel_pitch_mm` absent means relative (unit) pitch.
DepthMap frankot_chellappa(const GradientField& g, std::optional<double> pixel_pitch_mm);

struct PointCloud {
  struct Vertex {
    float x = 0.0F;
    float y = 0.0F;
    float z = 0.0F;
    std::uint8_t gray = 0;

    friend bool operator==(const Vertex&, const Vertex&) = default;
  };
  std::vector<Vertex> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// One vertex (c * pitch, r * pitch, z) per valid pixel, gray = round(255 albedo);
/// two triangles per 2x2 quad whose four pixels are all valid.
PointCloud depth_to_pointcloud(const DepthMap& depth, std::span<const double> albedo, const ValidityMask& mask);

/// Binary little-endian PLY: float x,y,z, uchar red,green,blue (gray
/// replicated) and, when present, a uchar/int vertex_indices face list.
void export_ply(const PointCloud& cloud, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ply(const PointCloud& cloud);
/// Parses the layout written by encode_ply.
PointCloud decode_ply(std::span<const std::uint8_t> bytes);
PointCloud read_ply(const std::filesystem::path& path);

/// 16-bit PNG export: valid z mapped linearly onto levels 1..65535, level 0
/// marks invalid pixels. Sidecar holds {z_min_mm, z_max_mm, pixel_pitch_mm,
/// units, invalid_level}.
void write_depth(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path,
                 const DepthMap& depth);
DepthMap read_depth(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path);

}  // namespace gradscan::integrate
