#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

#include "gradscan/error.hpp"
#include "gradscan/integrate.hpp"
#include "gradscan/png_io.hpp"

namespace gradscan::integrate {

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

PointCloud depth_to_pointcloud(const DepthMap& depth, std::span<const double> albedo, const ValidityMask& mask) {
  const std::size_t n = static_cast<std::size_t>(depth.width) * static_cast<std::size_t>(depth.height);
  if (depth.z.size() != n || albedo.size() != n || mask.width() != depth.width || mask.height() != depth.height)
    throw_invalid("depth, albedo and mask dimensions disagree");

  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> vertex_of(n, kNone);
  PointCloud cloud;
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * depth.width + c;
      if (!mask.valid(i)) continue;
      vertex_of[i] = static_cast<std::uint32_t>(cloud.vertices.size());
      const double gray = std::floor(255.0 * std::clamp(albedo[i], 0.0, 1.0) + 0.5);
      cloud.vertices.push_back({static_cast<float>(c * depth.pixel_pitch_mm),
                                static_cast<float>(r * depth.pixel_pitch_mm), static_cast<float>(depth.z[i]),
                                static_cast<std::uint8_t>(gray)});
    }
  }
  for (int r = 0; r + 1 < depth.height; ++r) {
    for (int c = 0; c + 1 < depth.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * depth.width + c;
      const std::uint32_t a = vertex_of[i];
      const std::uint32_t b = vertex_of[i + 1];
      const std::uint32_t d = vertex_of[i + depth.width];
      const std::uint32_t e = vertex_of[i + depth.width + 1];
      if (a == kNone || b == kNone || d == kNone || e == kNone) continue;
      cloud.triangles.push_back({a, d, b});
      cloud.triangles.push_back({b, d, e});
    }
  }
  return cloud;
}

std::vector<std::uint8_t> encode_ply(const PointCloud& cloud) {
  std::ostringstream header;
  header << "ply\n"
         << "format binary_little_endian 1.0\n"
         << "element vertex " << cloud.vertices.size() << "\n"
         << "property float x\n"
         << "property float y\n"
         << "property float z\n"
         << "property uchar red\n"
         << "property uchar green\n"
         << "property uchar blue\n";
  if (!cloud.triangles.empty())
    header << "element face " << cloud.triangles.size() << "\n"
           << "property list uchar int vertex_indices\n";
  header << "end_header\n";
  const std::string text = header.str();

  std::vector<std::uint8_t> out(text.begin(), text.end());
  out.reserve(out.size() + cloud.vertices.size() * 15 + cloud.triangles.size() * 13);
  auto put = [&out](const void* src, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(src);
    out.insert(out.end(), p, p + len);
  };
  for (const auto& v : cloud.vertices) {
    put(&v.x, 4);
    put(&v.y, 4);
    put(&v.z, 4);
    const std::uint8_t rgb[3] = {v.gray, v.gray, v.gray};
    put(rgb, 3);
  }
  for (const auto& t : cloud.triangles) {
    const std::uint8_t count = 3;
    put(&count, 1);
    for (std::uint32_t idx : t) {
      const auto signed_idx = static_cast<std::int32_t>(idx);
      put(&signed_idx, 4);
    }
  }
  return out;
}

void export_ply(const PointCloud& cloud, const std::filesystem::path& path) { write_file(path, encode_ply(cloud)); }

PointCloud decode_ply(std::span<const std::uint8_t> bytes) {
  const std::string marker = "end_header\n";
  const std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const auto end = view.find(marker);
  if (!view.starts_with("ply\n") || end == std::string_view::npos) throw_invalid("not a PLY stream");

  std::istringstream header{std::string(view.substr(0, end))};
  std::string line;
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  while (std::getline(header, line)) {
    std::istringstream tok(line);
    std::string word;
    tok >> word;
    if (word == "format") {
      std::string fmt;
      tok >> fmt;
      if (fmt != "binary_little_endian") throw_invalid("only binary_little_endian PLY is supported");
    } else if (word == "element") {
      tok >> current;
      std::size_t count = 0;
      tok >> count;
      if (current == "vertex") vertex_count = count;
      else if (current == "face") face_count = count;
      else throw_invalid("unexpected PLY element '" + current + "'");
    } else if (word == "property" && current == "vertex") {
      std::string type, name;
      tok >> type >> name;
      vertex_props.push_back(type + " " + name);
    }
  }
  const std::vector<std::string> expected = {"float x",       "float y",         "float z",
                                             "uchar red", "uchar green", "uchar blue"};
  if (vertex_props != expected) throw_invalid("unsupported PLY vertex layout");

  std::size_t pos = end + marker.size();
  auto take = [&](void* dst, std::size_t len) {
    if (pos + len > bytes.size()) throw_invalid("truncated PLY body");
    std::memcpy(dst, bytes.data() + pos, len);
    pos += len;
  };
  PointCloud cloud;
  cloud.vertices.resize(vertex_count);
  for (auto& v : cloud.vertices) {
    take(&v.x, 4);
    take(&v.y, 4);
    take(&v.z, 4);
    std::uint8_t rgb[3];
    take(rgb, 3);
    v.gray = rgb[0];
  }
  cloud.triangles.resize(face_count);
  for (auto& t : cloud.triangles) {
    std::uint8_t count = 0;
    take(&count, 1);
    if (count != 3) throw_invalid("only triangular PLY faces are supported");
    for (auto& idx : t) {
      std::int32_t v = 0;
      take(&v, 4);
      if (v < 0 || static_cast<std::size_t>(v) >= vertex_count) throw_invalid("PLY face index out of range");
      idx = static_cast<std::uint32_t>(v);
    }
  }
  return cloud;
}

PointCloud read_ply(const std::filesystem::path& path) { return decode_ply(read_file(path)); }

}  // namespace gradscan::integrate
