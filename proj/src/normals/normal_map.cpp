#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "gradscan/error.hpp"
#include "gradscan/normals.hpp"
#include "gradscan/png_io.hpp"

namespace gradscan::normals {

using nlohmann::json;

double Normal::norm() const { return std::sqrt(x * x + y * y + z * z); }

double angle_deg(const Normal& a, const Normal& b) {
  // atan2 of cross and dot stays accurate for tiny angles, unlike acos.
  const double cx = a.y * b.z - a.z * b.y;
  const double cy = a.z * b.x - a.x * b.z;
  const double cz = a.x * b.y - a.y * b.x;
  const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
  const double dot = a.x * b.x + a.y * b.y + a.z * b.z;
  return std::atan2(cross, dot) * 180.0 / M_PI;
}

NormalMap::NormalMap(int width, int height)
    : mask(width, height, true),
      clamped(width, height, false),
      albedo(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0),
      width_(width),
      height_(height),
      n_(albedo.size()) {}

void NormalMap::validate(double tolerance) const {
  for (std::size_t i = 0; i < n_.size(); ++i) {
    if (!mask.valid(i)) continue;
    if (std::abs(n_[i].norm() - 1.0) > tolerance) throw_invalid("normal map holds a non-unit normal");
    if (n_[i].z < 0.0) throw_invalid("normal map holds a normal facing away from the camera");
  }
}

namespace {

double encode_channel(double v) { return std::clamp(std::floor(255.0 * (v + 1.0) / 2.0 + 0.5), 0.0, 255.0); }

}  // namespace

ImageBuffer encode_normalmap_png(const NormalMap& nm) {
  ImageBuffer rgb = ImageBuffer::raw(nm.width(), nm.height(), 3, 8);
  auto dst = rgb.data();
  for (std::size_t i = 0; i < nm.pixel_count(); ++i) {
    dst[3 * i] = encode_channel(nm[i].x);
    dst[3 * i + 1] = encode_channel(nm[i].y);
    dst[3 * i + 2] = encode_channel(nm[i].z);
  }
  return rgb;
}

NormalMap decode_normalmap_png(const ImageBuffer& rgb) {
  if (rgb.channels() != 3 || rgb.colorspace() != ColorSpace::raw)
    throw_invalid("normal map image must be raw RGB");
  NormalMap nm(rgb.width(), rgb.height());
  for (std::size_t i = 0; i < nm.pixel_count(); ++i) {
    Normal n{2.0 * rgb.normalized(3 * i) - 1.0, 2.0 * rgb.normalized(3 * i + 1) - 1.0,
             2.0 * rgb.normalized(3 * i + 2) - 1.0};
    const double len = n.norm();
    if (len > 0.0) n = {n.x / len, n.y / len, n.z / len};
    nm[i] = n;
  }
  return nm;
}

static_assert(std::endian::native == std::endian::little, "float grid I/O assumes a little-endian host");

void write_normal_grid(const std::filesystem::path& grid_path, const std::filesystem::path& sidecar_path,
                       const NormalMap& nm) {
  std::vector<std::uint8_t> bytes(nm.pixel_count() * 3 * sizeof(float));
  for (std::size_t i = 0; i < nm.pixel_count(); ++i) {
    const float xyz[3] = {static_cast<float>(nm[i].x), static_cast<float>(nm[i].y), static_cast<float>(nm[i].z)};
    std::memcpy(bytes.data() + i * sizeof(xyz), xyz, sizeof(xyz));
  }
  write_file(grid_path, bytes);
  const json sidecar = {{"width", nm.width()},
                        {"height", nm.height()},
                        {"layout", "xyz interleaved float32 little-endian"}};
  write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

NormalMap read_normal_grid(const std::filesystem::path& grid_path, const std::filesystem::path& sidecar_path) {
  json sidecar;
  try {
    sidecar = json::parse(read_text_file(sidecar_path));
  } catch (const json::parse_error&) {
    throw_invalid("normal grid sidecar is not valid JSON");
  }
  if (sidecar.value("layout", "") != "xyz interleaved float32 little-endian")
    throw_invalid("unsupported normal grid layout");
  const int w = sidecar.at("width").get<int>();
  const int h = sidecar.at("height").get<int>();
  const auto bytes = read_file(grid_path);
  NormalMap nm(w, h);
  if (bytes.size() != nm.pixel_count() * 3 * sizeof(float))
    throw_invalid("normal grid size does not match its sidecar");
  for (std::size_t i = 0; i < nm.pixel_count(); ++i) {
    float xyz[3];
    std::memcpy(xyz, bytes.data() + i * sizeof(xyz), sizeof(xyz));
    nm[i] = {xyz[0], xyz[1], xyz[2]};
  }
  return nm;
}

}  // namespace gradscan::normals
