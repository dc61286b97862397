#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "gradscan/error.hpp"
#include "gradscan/integrate.hpp"
#include "gradscan/png_io.hpp"

namespace gradscan::integrate {

using nlohmann::json;

namespace {
constexpr double kTopLevel = 65535.0;
}

void write_depth(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path,
                 const DepthMap& depth) {
  double z_min = std::numeric_limits<double>::infinity();
  double z_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < depth.z.size(); ++i) {
    if (!depth.mask.valid(i)) continue;
    z_min = std::min(z_min, depth.z[i]);
    z_max = std::max(z_max, depth.z[i]);
  }
  if (!std::isfinite(z_min)) z_min = z_max = 0.0;
  const double span = z_max - z_min;

  ImageBuffer img = ImageBuffer::raw(depth.width, depth.height, 1, 16);
  auto dst = img.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!depth.mask.valid(i)) continue;
    const double t = span > 0.0 ? (depth.z[i] - z_min) / span : 0.0;
    dst[i] = 1.0 + std::clamp(std::floor(t * (kTopLevel - 1.0) + 0.5), 0.0, kTopLevel - 1.0);
  }
  write_png(png_path, img);

  const json sidecar = {{"z_min_mm", z_min},
                        {"z_max_mm", z_max},
                        {"pixel_pitch_mm", depth.pixel_pitch_mm},
                        {"units", depth.metric ? "mm" : "relative"},
                        {"invalid_level", 0}};
  write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

DepthMap read_depth(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path) {
  json sidecar;
  try {
    sidecar = json::parse(read_text_file(sidecar_path));
  } catch (const json::parse_error&) {
    throw_invalid("depth sidecar is not valid JSON");
  }
  const ImageBuffer img = read_png(png_path);
  if (img.bit_depth() != 16 || img.channels() != 1) throw_invalid("depth PNG must be 16-bit grayscale");

  DepthMap depth;
  try {
    const double z_min = sidecar.at("z_min_mm").get<double>();
    const double z_max = sidecar.at("z_max_mm").get<double>();
    depth.pixel_pitch_mm = sidecar.at("pixel_pitch_mm").get<double>();
    depth.metric = sidecar.at("units").get<std::string>() == "mm";
    depth.width = img.width();
    depth.height = img.height();
    depth.mask = ValidityMask(img.width(), img.height());
    depth.z.assign(img.size(), 0.0);
    auto src = img.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (src[i] == 0.0) {
        depth.mask.set(i, false);
        continue;
      }
      depth.z[i] = z_min + (src[i] - 1.0) / (kTopLevel - 1.0) * (z_max - z_min);
    }
  } catch (const json::exception&) {
    throw_invalid("depth sidecar is missing required keys");
  }
  return depth;
}

}  // namespace gradscan::integrate
