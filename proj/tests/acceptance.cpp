// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "gradscan/bundle.hpp"
#include "gradscan/error.hpp"
#include "gradscan/geomcal.hpp"
#include "gradscan/integrate.hpp"
#include "gradscan/normals.hpp"
#include "gradscan/png_io.hpp"
#include "gradscan/radiometric.hpp"
#include "gradscan/simulate.hpp"
#include "test_support.hpp"

using namespace gradscan;
namespace fs = std::filesystem;
using gradscan::testing::TempDir;

namespace {

// Pinned tolerances.
constexpr double kNoiseFreeMeanDeg = 0.1;
constexpr double kNoiseFreeP99Deg = 1.0;
constexpr double kRuntimeSeconds = 5.0;
constexpr double kDegradedMeanDeg = 3.0;
constexpr double kAlbedoRms = 1e-6;
constexpr double kReliefFraction = 0.5;
constexpr double kReliefSnr = 5.0;
constexpr double kGammaRelTol = 0.01;
constexpr double kFcRmseFraction = 0.005;
constexpr double kLinearityRel = 1e-9;
constexpr double kMirrorTol = 1e-9;
constexpr double kInteriorMargin = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct Window {
  int r0, r1, c0, c1;
  bool contains(int r, int c) const { return r >= r0 && r < r1 && c >= c0 && c < c1; }
};

Window interior(int w, int h) {
  const int mx = static_cast<int>(std::lround(kInteriorMargin * w));
  const int my = static_cast<int>(std::lround(kInteriorMargin * h));
  return {my, h - my, mx, w - mx};
}

simulate::SurfaceParams surface_params(int size, double pitch) {
  simulate::SurfaceParams p;
  p.width = p.height = size;
  p.pixel_pitch_mm = pitch;
  p.max_slope_deg = 60.0;
  return p;
}

struct Reconstruction {
  normals::NormalMap normals;
  integrate::DepthMap depth;
};

Reconstruction reconstruct(const CaptureBundle& bundle, const radiometric::ResponseCurve& curve, double pitch) {
  const auto frames = radiometric::normalize_bundle(bundle, curve);
  Reconstruction out;
  out.normals = normals::recover_normals(frames);
  out.depth = integrate::frankot_chellappa(integrate::gradients_from_normals(out.normals), pitch);
  return out;
}

struct AngleStats {
  double mean = 0.0;
  double p99 = 0.0;
  std::size_t count = 0;
};

AngleStats angular_error(const normals::NormalMap& got, const normals::NormalMap& truth) {
  const Window win = interior(got.width(), got.height());
  std::vector<double> err;
  for (int r = win.r0; r < win.r1; ++r)
    for (int c = win.c0; c < win.c1; ++c)
      if (got.mask.valid(r, c)) err.push_back(normals::angle_deg(got.at(r, c), truth.at(r, c)));
  AngleStats s;
  s.count = err.size();
  if (err.empty()) return s;
  double sum = 0.0;
  for (double e : err) sum += e;
  s.mean = sum / static_cast<double>(err.size());
  std::sort(err.begin(), err.end());
  const auto k = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(err.size()))) - 1;
  s.p99 = err[k];
  return s;
}

radiometric::ResponseCurve chart_calibration(double gamma, double noise, int bit_depth, std::uint64_t seed) {
  simulate::ChartSpec chart;
  chart.camera_gamma = gamma;
  chart.noise_sigma = noise;
  chart.bit_depth = bit_depth;
  chart.seed = seed;
  return radiometric::fit_response(simulate::render_chart(chart));
}

// ---------------------------------------------------------------------------

Outcome noise_free_round_trip() {
  Outcome o{true, ""};
  for (auto kind : {simulate::SurfaceKind::paraboloid, simulate::SurfaceKind::hemisphere}) {
    simulate::SceneSpec scene;
    scene.surface = simulate::make_test_surface(kind, surface_params(512, 0.1));
    scene.bit_depth = 16;
    const auto start = std::chrono::steady_clock::now();
    const CaptureBundle bundle = simulate::render_frames(scene);
    const Reconstruction rec = reconstruct(bundle, radiometric::ResponseCurve{}, 0.1);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const AngleStats s = angular_error(rec.normals, simulate::normals_from_heightfield(scene.surface));
    const bool ok = s.mean <= kNoiseFreeMeanDeg && s.p99 <= kNoiseFreeP99Deg && seconds < kRuntimeSeconds &&
                    s.count > 0;
    o.pass = o.pass && ok;
    o.detail += std::string(to_string(kind)) + " mean=" + fmt(s.mean) + "deg p99=" + fmt(s.p99) +
                "deg render+reconstruct=" + fmt(seconds) + "s; ";
  }
  o.detail += "limits mean<=" + fmt(kNoiseFreeMeanDeg) + " p99<=" + fmt(kNoiseFreeP99Deg) + " runtime<" +
              fmt(kRuntimeSeconds) + "s at 512x512";
  return o;
}

Outcome degraded_round_trip() {
  const radiometric::ResponseCurve curve = chart_calibration(2.2, 0.01, 8, 101);
  Outcome o{true, "chart gamma=" + fmt(curve.gamma) + "; "};
  for (auto kind : {simulate::SurfaceKind::paraboloid, simulate::SurfaceKind::hemisphere}) {
    simulate::SceneSpec scene;
    scene.surface = simulate::make_test_surface(kind, surface_params(256, 0.1));
    scene.camera_gamma = 2.2;
    scene.noise_sigma = 0.01;
    scene.bit_depth = 8;
    scene.seed = 7;
    const Reconstruction rec = reconstruct(simulate::render_frames(scene), curve, 0.1);
    const AngleStats s = angular_error(rec.normals, simulate::normals_from_heightfield(scene.surface));
    o.pass = o.pass && s.count > 0 && s.mean <= kDegradedMeanDeg;
    o.detail += std::string(to_string(kind)) + " mean=" + fmt(s.mean) + "deg; ";
  }
  o.detail += "limit mean<=" + fmt(kDegradedMeanDeg) + "deg";
  return o;
}

Outcome albedo_invariance() {
  simulate::SceneSpec plain;
  plain.surface = simulate::make_test_surface(simulate::SurfaceKind::hemisphere, surface_params(256, 0.1));
  plain.albedo = simulate::patch_albedo(256, 256, 0.2, 0.9, 16, 1);
  simulate::SceneSpec textured = plain;
  textured.albedo = simulate::patch_albedo(256, 256, 0.2, 0.9, 16, 2);

  auto recover = [](const simulate::SceneSpec& s) {
    return normals::recover_normals(radiometric::normalize_frames(simulate::render_radiance(s)));
  };
  auto rms_components = [](const normals::NormalMap& a, const normals::NormalMap& b, std::size_t& n) {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    n = 0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      if (!a.mask.valid(i) || !b.mask.valid(i)) continue;
      sx += std::pow(a[i].x - b[i].x, 2);
      sy += std::pow(a[i].y - b[i].y, 2);
      sz += std::pow(a[i].z - b[i].z, 2);
      ++n;
    }
    const double d = static_cast<double>(std::max<std::size_t>(n, 1));
    return std::array<double, 3>{std::sqrt(sx / d), std::sqrt(sy / d), std::sqrt(sz / d)};
  };
  std::size_t n = 0;
  const auto rms = rms_components(recover(plain), recover(textured), n);
  const double worst = std::max({rms[0], rms[1], rms[2]});

  // Informational: the same comparison after 16-bit quantization.
  std::size_t nq = 0;
  const auto quantized = rms_components(
      normals::recover_normals(radiometric::normalize_bundle(simulate::render_frames(plain), {})),
      normals::recover_normals(radiometric::normalize_bundle(simulate::render_frames(textured), {})), nq);
  return {n == plain.surface.z.size() && worst <= kAlbedoRms,
          "rms x=" + fmt(rms[0]) + " y=" + fmt(rms[1]) + " z=" + fmt(rms[2]) + " over " + std::to_string(n) +
              " pixels; limit " + fmt(kAlbedoRms) + " (16-bit quantized frames, not gated: max rms " +
              fmt(std::max({quantized[0], quantized[1], quantized[2]})) + ")"};
}

Outcome sub_millimeter_relief() {
  simulate::SurfaceParams p = surface_params(256, 0.1);
  p.height_mm = 0.4;
  simulate::SceneSpec scene;
  scene.surface = simulate::make_test_surface(simulate::SurfaceKind::embossed_digit, p);
  scene.camera_gamma = 2.2;
  scene.noise_sigma = 0.005;
  scene.bit_depth = 8;
  scene.seed = 11;
  const radiometric::ResponseCurve curve = chart_calibration(2.2, 0.005, 8, 12);
  const Reconstruction rec = reconstruct(simulate::render_frames(scene), curve, 0.1);

  double digit_sum = 0.0, base_sum = 0.0, base_sq = 0.0;
  std::size_t digit_n = 0, base_n = 0;
  for (std::size_t i = 0; i < scene.surface.z.size(); ++i) {
    if (!rec.depth.mask.valid(i)) continue;
    const double truth = scene.surface.z[i];
    const double z = rec.depth.z[i];
    if (truth >= 0.999 * p.height_mm) {
      digit_sum += z;
      ++digit_n;
    } else if (truth == 0.0) {
      base_sum += z;
      base_sq += z * z;
      ++base_n;
    }
  }
  const double digit_mean = digit_sum / digit_n;
  const double base_mean = base_sum / base_n;
  const double base_std = std::sqrt(std::max(base_sq / base_n - base_mean * base_mean, 0.0));
  const double contrast = digit_mean - base_mean;
  const bool ok = digit_n > 0 && base_n > 0 && contrast >= kReliefFraction * p.height_mm &&
                  contrast >= kReliefSnr * base_std;
  return {ok, "contrast=" + fmt(contrast) + "mm (need >=" + fmt(kReliefFraction * p.height_mm) +
                  ") base_std=" + fmt(base_std) + "mm ratio=" + fmt(contrast / base_std) + " (need >=" +
                  fmt(kReliefSnr) + ") digit_px=" + std::to_string(digit_n) + " base_px=" + std::to_string(base_n)};
}

Outcome gamma_recovery() {
  Outcome o{true, ""};
  std::uint64_t seed = 200;
  for (double gamma : {1.0, 1.8, 2.2, 2.6}) {
    const double fitted = chart_calibration(gamma, 0.01, 8, seed++).gamma;
    const double rel = std::abs(fitted - gamma) / gamma;
    o.pass = o.pass && rel <= kGammaRelTol;
    o.detail += fmt(gamma) + "->" + fmt(fitted) + " ";
  }
  o.detail += "(8-bit, noise 0.01, 32x32 tiles); limit " + fmt(100 * kGammaRelTol) + "%";
  return o;
}

Outcome frankot_chellappa_oracle() {
  // Analytic paraboloid z = -k (x^2 + y^2): p = -2 k x, q = -2 k y.
  const int w = 256, h = 200;
  const double pitch = 0.1, k = 0.05;
  const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
  integrate::GradientField g(w, h);
  std::vector<double> truth(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double x = (c - cx) * pitch, y = (r - cy) * pitch;
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      g.p[i] = -2.0 * k * x;
      g.q[i] = -2.0 * k * y;
      truth[i] = -k * (x * x + y * y);
    }
  }
  const integrate::DepthMap d = integrate::frankot_chellappa(g, pitch);
  const Window win = interior(w, h);
  double offset = 0.0;
  std::size_t n = 0;
  for (int r = win.r0; r < win.r1; ++r)
    for (int c = win.c0; c < win.c1; ++c, ++n) offset += d.at(r, c) - truth[r * w + c];
  offset /= n;
  double sq = 0.0;
  for (int r = win.r0; r < win.r1; ++r)
    for (int c = win.c0; c < win.c1; ++c) sq += std::pow(d.at(r, c) - truth[r * w + c] - offset, 2);
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  const double rmse_frac = std::sqrt(sq / n) / (*hi - *lo);

  integrate::GradientField zero(97, 61);
  const integrate::DepthMap dz = integrate::frankot_chellappa(zero, pitch);
  const bool zero_ok = std::all_of(dz.z.begin(), dz.z.end(), [](double z) { return z == 0.0; });

  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  double worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const int fw = 24 + pair * 3, fh = 20 + pair * 2;
    integrate::GradientField a(fw, fh), b(fw, fh), mix(fw, fh);
    const double alpha = coef(rng), beta = coef(rng);
    for (std::size_t i = 0; i < a.p.size(); ++i) {
      a.p[i] = nd(rng), a.q[i] = nd(rng), b.p[i] = nd(rng), b.q[i] = nd(rng);
      mix.p[i] = alpha * a.p[i] + beta * b.p[i];
      mix.q[i] = alpha * a.q[i] + beta * b.q[i];
    }
    const auto za = integrate::frankot_chellappa(a, pitch);
    const auto zb = integrate::frankot_chellappa(b, pitch);
    const auto zm = integrate::frankot_chellappa(mix, pitch);
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < zm.z.size(); ++i) {
      scale = std::max(scale, std::abs(alpha * za.z[i]) + std::abs(beta * zb.z[i]));
      diff = std::max(diff, std::abs(zm.z[i] - alpha * za.z[i] - beta * zb.z[i]));
    }
    worst = std::max(worst, diff / scale);
  }
  return {rmse_frac <= kFcRmseFraction && zero_ok && worst <= kLinearityRel,
          "paraboloid rmse=" + fmt(100 * rmse_frac) + "% of range (limit " + fmt(100 * kFcRmseFraction) +
              "%); zero field exact=" + (zero_ok ? "yes" : "no") + "; linearity max rel=" + fmt(worst) +
              " over 20 pairs (limit " + fmt(kLinearityRel) + ")"};
}

Outcome mirror_geometry() {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto vec = [&](double s) { return Eigen::Vector3d(s * nd(rng), s * nd(rng), s * nd(rng)); };
  double involution = 0.0, isometry = 0.0, pose_involution = 0.0, ortho = 0.0, det = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto plane = geomcal::PlaneSpec::from_normal(vec(1.0), 100.0 * nd(rng));
    geomcal::RigidPose v;
    v.rotation = Eigen::Quaterniond(nd(rng), nd(rng), nd(rng), nd(rng)).normalized().toRotationMatrix();
    v.translation = vec(200.0);
    const Eigen::Vector3d x = vec(100.0), y = vec(100.0);
    involution = std::max(involution, (geomcal::reflect_point(plane, geomcal::reflect_point(plane, x)) - x).norm());
    isometry = std::max(isometry, std::abs((geomcal::reflect_point(plane, x) - geomcal::reflect_point(plane, y)).norm() -
                                           (x - y).norm()));
    const auto real = geomcal::unreflect_pose(plane, v);
    const auto back = geomcal::unreflect_pose(plane, real);
    pose_involution = std::max({pose_involution, (back.rotation - v.rotation).cwiseAbs().maxCoeff(),
                                (back.translation - v.translation).norm()});
    ortho = std::max(ortho, (real.rotation.transpose() * real.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    det = std::max(det, std::abs(real.rotation.determinant() - 1.0));
  }
  const double worst = std::max({involution, isometry, pose_involution, ortho, det});
  return {worst <= kMirrorTol, "1000 pairs: involution=" + fmt(involution) + " isometry=" + fmt(isometry) +
                                   " pose involution=" + fmt(pose_involution) + " orthonormality=" + fmt(ortho) +
                                   " det=" + fmt(det) + " (limit " + fmt(kMirrorTol) + ")"};
}

Outcome format_stability() {
  TempDir dir("acceptance_formats");
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  for (int depth : {8, 16}) {
    simulate::SceneSpec scene;
    scene.surface = simulate::make_test_surface(simulate::SurfaceKind::sinusoid, surface_params(96, 0.1));
    scene.albedo = simulate::patch_albedo(96, 96, 0.1, 1.0, 8, 3);
    scene.bit_depth = depth;
    scene.noise_sigma = 0.01;
    const CaptureBundle b = simulate::render_frames(scene);
    const std::string tag = std::to_string(depth) + "-bit";
    save_bundle(b, dir / (tag + "_dir"));
    save_bundle(b, dir / (tag + ".zip"));
    check(load_bundle(dir / (tag + "_dir")) == b, "bundle directory " + tag);
    check(load_bundle(dir / (tag + ".zip")) == b, "bundle zip " + tag);
  }

  const radiometric::ResponseCurve curve{2.2037419, 0.8812345, 0.0123456789};
  radiometric::write_response(dir / "response.json", curve);
  const auto rc = radiometric::read_response(dir / "response.json");
  check(rc.gamma == curve.gamma && rc.gain == curve.gain && rc.residual == curve.residual, "response");

  integrate::GradientField g(40, 30);
  std::mt19937 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (double& v : g.p) v = nd(rng);
  for (double& v : g.q) v = nd(rng);
  g.mask.set(4, 7, false);
  const integrate::DepthMap depth = integrate::frankot_chellappa(g, 0.1);
  integrate::write_depth(dir / "d.png", dir / "d.json", depth);
  const auto back = integrate::read_depth(dir / "d.png", dir / "d.json");
  integrate::write_depth(dir / "d2.png", dir / "d2.json", back);
  check(read_file(dir / "d.json") == read_file(dir / "d2.json"), "depth sidecar");
  check(read_file(dir / "d.png") == read_file(dir / "d2.png"), "depth png");
  check(back.mask == depth.mask, "depth mask");

  std::vector<double> albedo(depth.z.size());
  for (double& a : albedo) a = std::abs(nd(rng)) / 3.0;
  const auto cloud = integrate::depth_to_pointcloud(depth, albedo, depth.mask);
  integrate::export_ply(cloud, dir / "c.ply");
  const auto cloud_back = integrate::read_ply(dir / "c.ply");
  check(cloud_back == cloud, "ply content");
  check(integrate::encode_ply(cloud_back) == read_file(dir / "c.ply"), "ply bytes");

  CaptureBundle golden_bundle;
  for (PatternId id : kPatternSequence) golden_bundle.frames.emplace(id, ImageBuffer::raw(4, 3, 1, 8));
  golden_bundle = make_bundle(std::move(golden_bundle.frames), 8, 0.1, "locked exposure 1/60 s");
  golden_bundle.manifest.chart_roi = ChartRoi{1, 0, 2, 2};
  check(manifest_to_json(golden_bundle.manifest).dump(2) + "\n" ==
            read_text_file(fs::path(GRADSCAN_GOLDEN_DIR) / "manifest.json"),
        "golden manifest");

  std::string detail = "bundle dir/zip 8+16-bit, response, depth png+sidecar, ply, golden manifest: ";
  if (failures.empty()) return {true, detail + "all bit-exact"};
  for (const auto& f : failures) detail += f + " ";
  return {false, detail + "differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"round-trip fidelity (noise-free)", noise_free_round_trip},
      {"round-trip under realistic degradation", degraded_round_trip},
      {"albedo invariance", albedo_invariance},
      {"sub-millimeter relief", sub_millimeter_relief},
      {"gamma recovery", gamma_recovery},
      {"Frankot-Chellappa oracle", frankot_chellappa_oracle},
      {"mirror geometry", mirror_geometry},
      {"format stability", format_stability},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
