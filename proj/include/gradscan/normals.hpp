#pragma once

#include <filesystem>
#include <vector>

#include "gradscan/image.hpp"
#include "gradscan/radiometric.hpp"

namespace gradscan::normals {

struct Normal {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  double norm() const;
  friend bool operator==(const Normal&, const Normal&) = default;
};

/// Angle between two vectors in degrees.
double angle_deg(const Normal& a, const Normal& b);

/// Per-pixel unit normals in camera coordinates (x right, y down, z toward
/// the camera). Invalid pixels hold the (0,0,1) sentinel.
class NormalMap {
 public:
  NormalMap() = default;
  NormalMap(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return n_.size(); }

  Normal& at(int row, int col) { return n_[index(row, col)]; }
  const Normal& at(int row, int col) const { return n_[index(row, col)]; }
  Normal& operator[](std::size_t i) { return n_[i]; }
  const Normal& operator[](std::size_t i) const { return n_[i]; }

  ValidityMask mask;
  /// Valid pixels whose (n_x, n_y) had to be rescaled onto the unit disk.
  ValidityMask clamped;
  std::vector<double> albedo;

  /// Throws Error(validation) if a valid normal is not unit length or has n_z < 0.
  void validate(double tolerance = 1e-6) const;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Normal> n_;
};

struct RecoverOptions {
  double scale = 1.0;
  double eps_z = 1e-3;
};

/// n_x = scale (r_xp - r_xn), n_y = scale (r_yp - r_yn), n_z = sqrt(1 - n_x^2 - n_y^2).
/// Pairs outside the disk of radius sqrt(1 - eps_z^2) are rescaled radially
/// onto it and flagged in `clamped`.
NormalMap recover_normals(const ImageBuffer& r_xp, const ImageBuffer& r_xn, const ImageBuffer& r_yp,
                          const ImageBuffer& r_yn, const ValidityMask& mask,
                          const RecoverOptions& options = {});

/// Convenience overload taking normalize_frames() output; copies the albedo.
NormalMap recover_normals(const radiometric::NormalizedFrames& frames, const RecoverOptions& options = {});

/// RGB 8-bit visualization: channel = round(255 (n_i + 1) / 2).
ImageBuffer encode_normalmap_png(const NormalMap& nm);
/// Inverse of encode_normalmap_png (all pixels valid, normals re-normalized).
NormalMap decode_normalmap_png(const ImageBuffer& rgb);

/// Lossless export: `<stem>.f32` holds xyz interleaved float32 little-endian,
/// `<stem>.json` holds {width, height, layout}.
void write_normal_grid(const std::filesystem::path& grid_path, const std::filesystem::path& sidecar_path,
                       const NormalMap& nm);
NormalMap read_normal_grid(const std::filesystem::path& grid_path, const std::filesystem::path& sidecar_path);

}  // namespace gradscan::normals
