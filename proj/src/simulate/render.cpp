#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "gradscan/error.hpp"
#include "gradscan/simulate.hpp"

namespace gradscan::simulate {

normals::NormalMap normals_from_heightfield(const HeightField& h) {
  h.validate();
  normals::NormalMap nm(h.width, h.height);
  const double pitch = h.pixel_pitch_mm;
  for (int r = 0; r < h.height; ++r) {
    for (int c = 0; c < h.width; ++c) {
      double dzdx = 0.0;
      double dzdy = 0.0;
      if (h.width > 1) {
        const int c0 = std::max(c - 1, 0);
        const int c1 = std::min(c + 1, h.width - 1);
        dzdx = (h.at(r, c1) - h.at(r, c0)) / ((c1 - c0) * pitch);
      }
      if (h.height > 1) {
        const int r0 = std::max(r - 1, 0);
        const int r1 = std::min(r + 1, h.height - 1);
        dzdy = (h.at(r1, c) - h.at(r0, c)) / ((r1 - r0) * pitch);
      }
      const double len = std::sqrt(dzdx * dzdx + dzdy * dzdy + 1.0);
      nm.at(r, c) = normals::Normal{-dzdx / len, -dzdy / len, 1.0 / len};
    }
  }
  return nm;
}

PixelRadiance lambertian_radiance(double albedo, const normals::Normal& n, double gain) {
  const double full = gain * albedo;
  return {full * (1.0 + n.x) / 2.0, full * (1.0 - n.x) / 2.0, full * (1.0 + n.y) / 2.0,
          full * (1.0 - n.y) / 2.0, full};
}

void SceneSpec::validate() const {
  surface.validate();
  if (!albedo.empty()) {
    if (albedo.size() != surface.z.size()) throw_invalid("albedo dimensions do not match the surface");
    for (double a : albedo)
      if (!(a >= 0.0 && a <= 1.0)) throw_invalid("albedo must lie in [0,1]");
  }
  if (!(camera_gamma >= 1.0)) throw_invalid("camera gamma must be >= 1");
  if (!(noise_sigma >= 0.0)) throw_invalid("noise sigma must be >= 0");
  if (bit_depth != 8 && bit_depth != 16) throw_invalid("bit depth must be 8 or 16");
  if (!(gain > 0.0 && gain <= 1.0)) throw_invalid("gain must lie in (0,1]");
}

radiometric::LinearFrames render_radiance(const SceneSpec& scene) {
  scene.validate();
  const normals::NormalMap nm = normals_from_heightfield(scene.surface);
  const int w = scene.surface.width;
  const int h = scene.surface.height;
  radiometric::LinearFrames frames;
  for (PatternId id : kPatternSequence) frames.emplace(id, ImageBuffer::linear(w, h));
  auto xp = frames.at(PatternId::GradXPos).data();
  auto xn = frames.at(PatternId::GradXNeg).data();
  auto yp = frames.at(PatternId::GradYPos).data();
  auto yn = frames.at(PatternId::GradYNeg).data();
  auto full = frames.at(PatternId::FullOn).data();
  for (std::size_t i = 0; i < nm.pixel_count(); ++i) {
    const double rho = scene.albedo.empty() ? 1.0 : scene.albedo[i];
    const PixelRadiance px = lambertian_radiance(rho, nm[i], scene.gain);
    xp[i] = px.x_pos;
    xn[i] = px.x_neg;
    yp[i] = px.y_pos;
    yn[i] = px.y_neg;
    full[i] = px.full;
  }
  return frames;
}

namespace {

// Camera model shared by frames and chart tiles: response, then sensor noise,
// then quantization.
class Camera {
 public:
  Camera(double gamma, double sigma, int bit_depth, std::uint64_t seed)
      : inv_gamma_(1.0 / gamma), sigma_(sigma), max_code_(static_cast<double>((1u << bit_depth) - 1u)), rng_(seed) {}

  double capture(double radiance) {
    double m = std::pow(std::max(radiance, 0.0), inv_gamma_);
    if (sigma_ > 0.0) m += sigma_ * noise_(rng_);
    return std::clamp(std::floor(m * max_code_ + 0.5), 0.0, max_code_);
  }

  double max_code() const { return max_code_; }

 private:
  double inv_gamma_;
  double sigma_;
  double max_code_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

std::string describe(const SceneSpec& scene) {
  std::ostringstream note;
  note << std::setprecision(6) << "synthetic: gamma=" << scene.camera_gamma << " noise_sigma=" << scene.noise_sigma
       << " gain=" << scene.gain << " seed=" << scene.seed;
  return note.str();
}

}  // namespace

CaptureBundle render_frames(const SceneSpec& scene) {
  const radiometric::LinearFrames radiance = render_radiance(scene);
  Camera camera(scene.camera_gamma, scene.noise_sigma, scene.bit_depth, scene.seed);
  std::map<PatternId, ImageBuffer> frames;
  for (PatternId id : kPatternSequence) {
    const ImageBuffer& src = radiance.at(id);
    ImageBuffer raw = ImageBuffer::raw(src.width(), src.height(), 1, scene.bit_depth);
    auto in = src.data();
    auto out = raw.data();
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = camera.capture(in[i]);
    frames.emplace(id, std::move(raw));
  }
  return make_bundle(std::move(frames), scene.bit_depth, scene.surface.pixel_pitch_mm, describe(scene));
}

radiometric::ChartMeasurement render_chart(const ChartSpec& spec) {
  if (spec.tile_pixels < 1) throw_invalid("chart tiles need at least one pixel");
  if (!(spec.camera_gamma > 0.0) || !(spec.gain > 0.0)) throw_invalid("chart camera gamma and gain must be positive");
  if (spec.bit_depth != 8 && spec.bit_depth != 16) throw_invalid("bit depth must be 8 or 16");
  Camera camera(spec.camera_gamma, spec.noise_sigma, spec.bit_depth, spec.seed);
  const int n = spec.tile_pixels * spec.tile_pixels;
  radiometric::ChartMeasurement chart;
  for (double rho : spec.reflectances) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += camera.capture(spec.gain * rho);
    chart.tiles.push_back({rho, sum / n / camera.max_code()});
  }
  return chart;
}

}  // namespace gradscan::simulate
