#include <algorithm>
#include <cmath>

#include "gradscan/error.hpp"
#include "gradscan/png_io.hpp"
#include "gradscan/simulate.hpp"

namespace gradscan::simulate {

using nlohmann::json;

void write_heightfield(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path,
                       const HeightField& h) {
  h.validate();
  const auto [lo, hi] = std::minmax_element(h.z.begin(), h.z.end());
  const double offset = *lo;
  const double scale = *hi > *lo ? (*hi - *lo) / 65535.0 : 1.0;
  ImageBuffer img = ImageBuffer::raw(h.width, h.height, 1, 16);
  auto dst = img.data();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = std::clamp(std::floor((h.z[i] - offset) / scale + 0.5), 0.0, 65535.0);
  write_png(png_path, img);
  const json sidecar = {{"pixel_pitch_mm", h.pixel_pitch_mm}, {"z_offset_mm", offset}, {"z_scale_mm", scale}};
  write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

HeightField read_heightfield(const std::filesystem::path& png_path, const std::filesystem::path& sidecar_path) {
  json sidecar;
  try {
    sidecar = json::parse(read_text_file(sidecar_path));
  } catch (const json::parse_error&) {
    throw_invalid("height field sidecar is not valid JSON");
  }
  ImageBuffer img = to_grayscale(read_png(png_path));
  HeightField h;
  try {
    h = HeightField(img.width(), img.height(), sidecar.at("pixel_pitch_mm").get<double>());
    const double offset = sidecar.at("z_offset_mm").get<double>();
    const double scale = sidecar.at("z_scale_mm").get<double>();
    auto src = img.data();
    for (std::size_t i = 0; i < src.size(); ++i) h.z[i] = offset + src[i] * scale;
  } catch (const json::exception&) {
    throw_invalid("height field sidecar needs pixel_pitch_mm, z_offset_mm, z_scale_mm");
  }
  h.validate();
  return h;
}

}  // namespace gradscan::simulate
