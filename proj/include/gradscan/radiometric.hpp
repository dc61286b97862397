#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradscan/bundle.hpp"
#include "gradscan/image.hpp"

namespace gradscan::radiometric {

/// One gray tile of the calibration chart.
struct ChartTile {
  double reflectance = 0.0;  // known linear reflectance, (0, 1]
  double measured = 0.0;     // mean normalized camera value, [0, 1]
};

struct ChartMeasurement {
  std::vector<ChartTile> tiles;
};

/// Camera response model m = (gain * rho)^(1/gamma).
struct ResponseCurve {
  double gamma = 1.0;
  double gain = 1.0;
  /// RMS of log(linearized) - log(reflectance) over the tiles used in the fit.
  double residual = 0.0;

  /// Maps a normalized camera value to linear intensity, clamped to [0, 1].
  double linearize(double normalized) const;
};

struct FitOptions {
  double saturation_threshold = 0.98;
  double black_threshold = 0.02;
};

/// Least-squares line through (log rho, log m): slope 1/gamma, intercept
/// log(gain)/gamma. Saturated and near-black tiles are excluded first.
ResponseCurve fit_response(const ChartMeasurement& chart, const FitOptions& options = {});

/// Per-pixel (v^gamma) / gain of the normalized raw input, clamped to [0, 1].
ImageBuffer linearize(const ImageBuffer& raw, const ResponseCurve& curve);

/// Linearized frames keyed by pattern.
using LinearFrames = std::map<PatternId, ImageBuffer>;

LinearFrames linearize_bundle(const CaptureBundle& bundle, const ResponseCurve& curve);

struct NormalizedFrames {
  ImageBuffer x_pos;
  ImageBuffer x_neg;
  ImageBuffer y_pos;
  ImageBuffer y_neg;
  ValidityMask mask;
  /// Mean of the four linearized gradient frames.
  ImageBuffer albedo;
};

/// Divides each gradient frame by the full-on frame. Pixels whose full-on
/// intensity is below eps_full are marked invalid and zeroed.
NormalizedFrames normalize_frames(const LinearFrames& frames, double eps_full = 0.02);

NormalizedFrames normalize_bundle(const CaptureBundle& bundle, const ResponseCurve& curve,
                                  double eps_full = 0.02);

// Chart CSV: header "reflectance,measured", one tile per row.
ChartMeasurement parse_chart_csv(const std::string& text);
ChartMeasurement read_chart_csv(const std::filesystem::path& path);
std::string format_chart_csv(const ChartMeasurement& chart);

nlohmann::json response_to_json(const ResponseCurve& curve);
ResponseCurve response_from_json(const nlohmann::json& doc);
void write_response(const std::filesystem::path& path, const ResponseCurve& curve);
ResponseCurve read_response(const std::filesystem::path& path);

}  // namespace gradscan::radiometric
