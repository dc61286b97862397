#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradscan/bundle.hpp"
#include "gradscan/normals.hpp"
#include "gradscan/radiometric.hpp"

namespace gradscan::simulate {

/// Ground-truth surface: z in mm on a regular grid.
struct HeightField {
  int width = 0;
  int height = 0;
  double pixel_pitch_mm = 1.0;
  std::vector<double> z;

  HeightField() = default;
  HeightField(int w, int h, double pitch);

  double& at(int row, int col) { return z[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const { return z[static_cast<std::size_t>(row) * width + col]; }

  void validate() const;
};

/// n = normalize(-dz/dx, -dz/dy, 1) with central differences (one-sided on
/// the border) scaled by the pixel pitch.
normals::NormalMap normals_from_heightfield(const HeightField& h);

/// Radiance seen under each of the five patterns for one Lambertian pixel.
struct PixelRadiance {
  double x_pos = 0.0;
  double x_neg = 0.0;
  double y_pos = 0.0;
  double y_neg = 0.0;
  double full = 0.0;
};

/// full = gain rho, x_pos = gain rho (1 + n_x) / 2, x_neg = gain rho (1 - n_x) / 2,
/// and likewise for y. `gain` is unconstrained here so un-normalized
/// radiances (gain = 2 pi / 3) can be reproduced.
PixelRadiance lambertian_radiance(double albedo, const normals::Normal& n, double gain);

struct SceneSpec {
  HeightField surface;
  /// Per-pixel albedo in [0, 1]; empty means uniform 1.0.
  std::vector<double> albedo;
  double camera_gamma = 1.0;
  /// Std of additive Gaussian noise on the normalized camera signal.
  double noise_sigma = 0.0;
  int bit_depth = 16;
  double gain = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noise-free linear radiance per pattern (before the camera response).
radiometric::LinearFrames render_radiance(const SceneSpec& scene);

/// Full camera model: radiance -> m = r^(1/gamma) -> + noise -> quantize.
CaptureBundle render_frames(const SceneSpec& scene);

enum class SurfaceKind { flat, ramp, paraboloid, hemisphere, embossed_digit, sinusoid };

SurfaceKind surface_kind_from_string(std::string_view name);
std::string_view to_string(SurfaceKind kind);

struct SurfaceParams {
  int width = 256;
  int height = 256;
  double pixel_pitch_mm = 0.1;
  // ramp: z = slope * x_mm
  double slope = 1.0;
  // paraboloid: z = -k (x^2 + y^2) about the centre; k is derived from
  // max_slope_deg (reached at the corners) unless curvature_per_mm > 0.
  double curvature_per_mm = 0.0;
  // hemisphere and paraboloid: steepest slope in degrees.
  double max_slope_deg = 60.0;
  // hemisphere: sphere radius; <= 0 selects 35% of the smaller extent.
  double radius_mm = 0.0;
  // embossed_digit
  std::string text = "16";
  double height_mm = 0.4;
  int cell_px = 12;
  int edge_px = 2;
  // sinusoid: z = amplitude sin(2 pi x / period) cos(2 pi y / period)
  double amplitude_mm = 0.2;
  double period_mm = 6.4;
};

/// Reads any subset of the SurfaceParams fields from a JSON object.
SurfaceParams surface_params_from_json(const nlohmann::json& doc);

/// Deterministic analytic or rasterized test surface.
///
/// hemisphere: z = sqrt(R^2 - r^2) up to the radius where the slope reaches
/// max_slope_deg, then the tangent cone down to the z = 0 base (for 90 deg
/// this is the plain hemisphere). embossed_digit: 5x7 glyphs scaled by
/// cell_px, edges softened by a box filter of half-width edge_px, plateau at
/// exactly height_mm above a zero base.
HeightField make_test_surface(SurfaceKind kind, const SurfaceParams& params);

/// Piecewise-constant albedo texture: square patches of `patch_px` with
/// values drawn uniformly from [lo, hi].
std::vector<double> patch_albedo(int width, int height, double lo, double hi, int patch_px, std::uint64_t seed);

struct ChartSpec {
  std::vector<double> reflectances = {0.031, 0.090, 0.198, 0.362, 0.591, 0.900};
  double camera_gamma = 1.0;
  double gain = 0.9;
  double noise_sigma = 0.0;
  int bit_depth = 8;
  int tile_pixels = 32;
  std::uint64_t seed = 0;
};

/// Images each gray tile (tile_pixels^2 pixels) through the same camera model
/// as render_frames and reports the normalized tile means.
radiometric::ChartMeasurement render_chart(const ChartSpec& spec);

/// 16-bit PNG with sidecar {pixel_pitch_mm, z_offset_mm, z_scale_mm}:
/// z = z_offset_mm + level * z_scale_mm.
void write_heightfield(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path,
                       const HeightField& h);
HeightField read_heightfield(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path);

}  // namespace gradscan::simulate
