#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "gradscan/error.hpp"
#include "gradscan/simulate.hpp"

namespace gradscan::simulate {

using nlohmann::json;

HeightField::HeightField(int w, int h, double pitch)
    : width(w), height(h), pixel_pitch_mm(pitch), z(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0) {}

void HeightField::validate() const {
  if (width < 1 || height < 1) throw_invalid("height field is empty");
  if (!(pixel_pitch_mm > 0.0) || !std::isfinite(pixel_pitch_mm)) throw_invalid("pixel pitch must be positive");
  if (z.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw_invalid("height field data length does not match its dimensions");
  for (double v : z)
    if (!std::isfinite(v)) throw_invalid("height field holds non-finite values");
}

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"flat",       "ramp",           "paraboloid",
                                                        "hemisphere", "embossed_digit", "sinusoid"};

// 5x7 digit glyphs, one string per row, '#' = raised.
constexpr std::array<std::array<std::string_view, 7>, 10> kDigits = {{
    {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."},
    {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."},
    {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"},
    {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."},
    {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."},
    {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."},
    {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."},
    {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."},
    {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."},
    {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."},
}};

// Separable box filter of half-width `radius`, clamp-to-edge. Divides by the
// window length so a fully covered window yields exactly 1.0.
std::vector<double> box_blur(const std::vector<double>& src, int w, int h, int radius) {
  if (radius <= 0) return src;
  const double len = 2.0 * radius + 1.0;
  std::vector<double> tmp(src.size());
  std::vector<double> out(src.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += src[static_cast<std::size_t>(r) * w + std::clamp(c + k, 0, w - 1)];
      tmp[static_cast<std::size_t>(r) * w + c] = s / len;
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += tmp[static_cast<std::size_t>(std::clamp(r + k, 0, h - 1)) * w + c];
      out[static_cast<std::size_t>(r) * w + c] = s / len;
    }
  }
  return out;
}

HeightField embossed_digits(const SurfaceParams& p) {
  if (p.text.empty()) throw_invalid("embossed_digit needs at least one digit");
  for (char ch : p.text)
    if (ch < '0' || ch > '9') throw_invalid("embossed_digit text must contain digits only");
  if (p.cell_px < 1 || p.edge_px < 0) throw_invalid("embossed_digit cell_px must be >= 1 and edge_px >= 0");
  if (!(p.height_mm > 0.0)) throw_invalid("embossed_digit height_mm must be positive");
  if (2 * p.edge_px + 1 > p.cell_px) throw_invalid("embossed_digit edge_px too wide for the stroke width");

  const int glyphs = static_cast<int>(p.text.size());
  const int text_w = (glyphs * 6 - 1) * p.cell_px;  // one blank column between glyphs
  const int text_h = 7 * p.cell_px;
  const int margin = p.edge_px + 1;
  if (text_w + 2 * margin > p.width || text_h + 2 * margin > p.height)
    throw_invalid("embossed_digit text does not fit the surface");

  const int x0 = (p.width - text_w) / 2;
  const int y0 = (p.height - text_h) / 2;
  std::vector<double> mask(static_cast<std::size_t>(p.width) * p.height, 0.0);
  for (int g = 0; g < glyphs; ++g) {
    const auto& glyph = kDigits[static_cast<std::size_t>(p.text[static_cast<std::size_t>(g)] - '0')];
    for (int gr = 0; gr < 7; ++gr) {
      for (int gc = 0; gc < 5; ++gc) {
        if (glyph[static_cast<std::size_t>(gr)][static_cast<std::size_t>(gc)] != '#') continue;
        const int top = y0 + gr * p.cell_px;
        const int left = x0 + (g * 6 + gc) * p.cell_px;
        for (int r = top; r < top + p.cell_px; ++r)
          for (int c = left; c < left + p.cell_px; ++c) mask[static_cast<std::size_t>(r) * p.width + c] = 1.0;
      }
    }
  }
  const auto soft = box_blur(mask, p.width, p.height, p.edge_px);
  HeightField h(p.width, p.height, p.pixel_pitch_mm);
  for (std::size_t i = 0; i < soft.size(); ++i) h.z[i] = p.height_mm * soft[i];
  return h;
}

double max_slope_radians(double deg) {
  if (!(deg > 0.0 && deg <= 90.0)) throw_invalid("max_slope_deg must lie in (0, 90]");
  return deg * M_PI / 180.0;
}

}  // namespace

SurfaceKind surface_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<SurfaceKind>(i);
  throw_invalid("unknown surface kind '" + std::string(name) + "'");
}

std::string_view to_string(SurfaceKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

SurfaceParams surface_params_from_json(const json& doc) {
  if (!doc.is_object()) throw_invalid("surface parameters must be a JSON object");
  SurfaceParams p;
  static constexpr std::array<std::string_view, 13> kKnown = {
      "width",     "height",    "pixel_pitch_mm", "slope",   "curvature_per_mm", "max_slope_deg", "radius_mm",
      "text",      "height_mm", "cell_px",        "edge_px", "amplitude_mm",     "period_mm"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end())
      throw_invalid("unknown surface parameter '" + key + "'");
  }
  try {
    p.width = doc.value("width", p.width);
    p.height = doc.value("height", p.height);
    p.pixel_pitch_mm = doc.value("pixel_pitch_mm", p.pixel_pitch_mm);
    p.slope = doc.value("slope", p.slope);
    p.curvature_per_mm = doc.value("curvature_per_mm", p.curvature_per_mm);
    p.max_slope_deg = doc.value("max_slope_deg", p.max_slope_deg);
    p.radius_mm = doc.value("radius_mm", p.radius_mm);
    p.text = doc.value("text", p.text);
    p.height_mm = doc.value("height_mm", p.height_mm);
    p.cell_px = doc.value("cell_px", p.cell_px);
    p.edge_px = doc.value("edge_px", p.edge_px);
    p.amplitude_mm = doc.value("amplitude_mm", p.amplitude_mm);
    p.period_mm = doc.value("period_mm", p.period_mm);
  } catch (const json::exception& e) {
    throw_invalid(std::string("bad surface parameter type: ") + e.what());
  }
  return p;
}

HeightField make_test_surface(SurfaceKind kind, const SurfaceParams& p) {
  if (p.width < 2 || p.height < 2) throw_invalid("test surface must be at least 2x2 pixels");
  if (!(p.pixel_pitch_mm > 0.0)) throw_invalid("pixel_pitch_mm must be positive");

  HeightField h(p.width, p.height, p.pixel_pitch_mm);
  const double cx = 0.5 * (p.width - 1);
  const double cy = 0.5 * (p.height - 1);
  auto x_mm = [&](int c) { return (c - cx) * p.pixel_pitch_mm; };
  auto y_mm = [&](int r) { return (r - cy) * p.pixel_pitch_mm; };

  switch (kind) {
    case SurfaceKind::flat:
      break;
    case SurfaceKind::ramp:
      for (int r = 0; r < p.height; ++r)
        for (int c = 0; c < p.width; ++c) h.at(r, c) = p.slope * (c * p.pixel_pitch_mm);
      break;
    case SurfaceKind::paraboloid: {
      double k = p.curvature_per_mm;
      if (!(k > 0.0)) {
        const double r_corner = std::hypot(x_mm(0), y_mm(0));
        k = std::tan(max_slope_radians(p.max_slope_deg)) / (2.0 * r_corner);
      }
      for (int r = 0; r < p.height; ++r)
        for (int c = 0; c < p.width; ++c) h.at(r, c) = -k * (x_mm(c) * x_mm(c) + y_mm(r) * y_mm(r));
      break;
    }
    case SurfaceKind::hemisphere: {
      const double theta = max_slope_radians(p.max_slope_deg);
      const double radius =
          p.radius_mm > 0.0 ? p.radius_mm : 0.35 * std::min(p.width, p.height) * p.pixel_pitch_mm;
      const double r_tangent = radius * std::sin(theta);
      const double z_tangent = radius * std::cos(theta);
      const double cone = std::tan(theta);
      for (int r = 0; r < p.height; ++r) {
        for (int c = 0; c < p.width; ++c) {
          const double rr = std::hypot(x_mm(c), y_mm(r));
          double z = 0.0;
          if (rr <= r_tangent) z = std::sqrt(std::max(radius * radius - rr * rr, 0.0));
          else if (theta < 0.5 * M_PI) z = std::max(z_tangent - cone * (rr - r_tangent), 0.0);
          h.at(r, c) = z;
        }
      }
      break;
    }
    case SurfaceKind::embossed_digit:
      return embossed_digits(p);
    case SurfaceKind::sinusoid:
      if (!(p.period_mm > 0.0)) throw_invalid("sinusoid period_mm must be positive");
      for (int r = 0; r < p.height; ++r)
        for (int c = 0; c < p.width; ++c)
          h.at(r, c) = p.amplitude_mm * std::sin(2.0 * M_PI * x_mm(c) / p.period_mm) *
                       std::cos(2.0 * M_PI * y_mm(r) / p.period_mm);
      break;
  }
  return h;
}

std::vector<double> patch_albedo(int width, int height, double lo, double hi, int patch_px, std::uint64_t seed) {
  if (patch_px < 1) throw_invalid("patch size must be positive");
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw_invalid("albedo range must lie within [0,1]");
  const int pw = (width + patch_px - 1) / patch_px;
  const int ph = (height + patch_px - 1) / patch_px;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> patches(static_cast<std::size_t>(pw) * ph);
  for (double& v : patches) v = dist(rng);
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      out[static_cast<std::size_t>(r) * width + c] = patches[static_cast<std::size_t>(r / patch_px) * pw + c / patch_px];
  return out;
}

}  // namespace gradscan::simulate
