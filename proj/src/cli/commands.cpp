#include "gradscan/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gradscan/bundle.hpp"
#include "gradscan/error.hpp"
#include "gradscan/geomcal.hpp"
#include "gradscan/integrate.hpp"
#include "gradscan/normals.hpp"
#include "gradscan/patterns.hpp"
#include "gradscan/png_io.hpp"
#include "gradscan/radiometric.hpp"
#include "gradscan/simulate.hpp"

namespace gradscan::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Thrown when a session already holds results and --force was not given.
struct RefusedOverwrite {
  std::string what;
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw_io("cannot create directory '" + dir.string() + "'");
}

void require_exists(const fs::path& path, const char* what) {
  if (!fs::exists(path)) throw_invalid(std::string(what) + " '" + path.string() + "' does not exist");
}

class SessionLog {
 public:
  explicit SessionLog(std::ostream& echo) : echo_(echo) {}

  void line(const std::string& text) {
    lines_ << text << '\n';
    echo_ << text << '\n';
  }
  void value(const std::string& key, double v) { line(key + ": " + num(v)); }

  void append_to(const fs::path& path) const {
    std::ofstream f(path, std::ios::app);
    if (!f) throw_io("cannot write log '" + path.string() + "'");
    f << lines_.str();
  }

 private:
  std::ostream& echo_;
  std::ostringstream lines_;
};

// ---------------------------------------------------------------- patterns

struct PatternsArgs {
  int width = 0;
  int height = 0;
  std::string out;
  double display_gamma = 2.2;
};

void add_patterns(CLI::App& app, PatternsArgs& a) {
  app.add_option("--width", a.width, "Screen width in pixels")->required()->check(CLI::Range(2, 1 << 16));
  app.add_option("--height", a.height, "Screen height in pixels")->required()->check(CLI::Range(2, 1 << 16));
  app.add_option("--out", a.out, "Output directory")->required();
  app.add_option("--display-gamma", a.display_gamma, "Display gamma to pre-compensate")
      ->check(CLI::PositiveNumber);
}

int run_patterns(const PatternsArgs& a, std::ostream& out) {
  for (const auto& p : patterns::emit_pattern_files(a.width, a.height, a.out, a.display_gamma))
    out << p.string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string surface = "paraboloid";
  std::string params;
  std::string heightfield;
  double gamma = 1.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  int bit_depth = 16;
  double gain = 0.9;
  std::vector<double> albedo_range;
  int albedo_patch_px = 16;
  std::string out;
  bool zip = false;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  app.add_option("--surface", a.surface, "flat|ramp|paraboloid|hemisphere|embossed_digit|sinusoid");
  app.add_option("--params", a.params, "Surface parameters: inline JSON object or path to a JSON file");
  app.add_option("--heightfield", a.heightfield, "16-bit height PNG (sidecar <stem>.json) instead of --surface");
  app.add_option("--gamma", a.gamma, "Camera response gamma (>= 1)");
  app.add_option("--noise", a.noise, "Gaussian noise std in normalized camera units");
  app.add_option("--seed", a.seed, "Noise RNG seed");
  app.add_option("--bit-depth", a.bit_depth, "Frame bit depth")->check(CLI::IsMember({8, 16}));
  app.add_option("--gain", a.gain, "Illumination gain in (0,1]");
  app.add_option("--albedo-range", a.albedo_range, "LO HI: random albedo patches instead of uniform 1.0")
      ->expected(2);
  app.add_option("--albedo-patch-px", a.albedo_patch_px, "Albedo patch size in pixels")->check(CLI::PositiveNumber);
  app.add_option("--out", a.out, "Output directory")->required();
  app.add_flag("--zip", a.zip, "Write the bundle as bundle.zip instead of a directory");
}

json parse_params(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    if (!text.empty() && text.front() == '{') return json::parse(text);
    return json::parse(read_text_file(text));
  } catch (const json::parse_error& e) {
    throw_invalid(std::string("--params is not valid JSON: ") + e.what());
  }
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  simulate::SceneSpec scene;
  if (!a.heightfield.empty()) {
    fs::path png(a.heightfield);
    scene.surface = simulate::read_heightfield(png, fs::path(png).replace_extension(".json"));
  } else {
    const auto kind = simulate::surface_kind_from_string(a.surface);
    scene.surface = simulate::make_test_surface(kind, simulate::surface_params_from_json(parse_params(a.params)));
  }
  scene.camera_gamma = a.gamma;
  scene.noise_sigma = a.noise;
  scene.seed = a.seed;
  scene.bit_depth = a.bit_depth;
  scene.gain = a.gain;
  if (!a.albedo_range.empty())
    scene.albedo = simulate::patch_albedo(scene.surface.width, scene.surface.height, a.albedo_range[0],
                                          a.albedo_range[1], a.albedo_patch_px, a.seed);
  const CaptureBundle bundle = simulate::render_frames(scene);

  const fs::path root(a.out);
  ensure_directory(root);
  const fs::path bundle_path = root / (a.zip ? "bundle.zip" : "bundle");
  save_bundle(bundle, bundle_path);

  const fs::path truth = root / "truth";
  ensure_directory(truth);
  normals::NormalMap nm = simulate::normals_from_heightfield(scene.surface);
  normals::write_normal_grid(truth / "normals.f32", truth / "normals.json", nm);
  write_png(truth / "normals.png", normals::encode_normalmap_png(nm));
  simulate::write_heightfield(truth / "height.png", truth / "height.json", scene.surface);

  simulate::ChartSpec chart;
  chart.camera_gamma = a.gamma;
  chart.gain = a.gain;
  chart.noise_sigma = a.noise;
  chart.bit_depth = a.bit_depth;
  chart.seed = a.seed + 1;
  write_text_file(root / "chart.csv", radiometric::format_chart_csv(simulate::render_chart(chart)));

  out << "bundle: " << bundle_path.string() << '\n' << "truth: " << truth.string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string chart_csv;
  std::string out;
  double saturation = 0.98;
  double black = 0.02;
};

void add_calibrate(CLI::App& app, CalibrateArgs& a) {
  app.add_option("--chart-csv", a.chart_csv, "Chart CSV with header reflectance,measured")->required();
  app.add_option("--out", a.out, "Output response JSON (or directory)")->required();
  app.add_option("--saturation", a.saturation, "Exclude tiles measured above this value");
  app.add_option("--black", a.black, "Exclude tiles measured below this value");
}

int run_calibrate(const CalibrateArgs& a, std::ostream& out) {
  require_exists(a.chart_csv, "chart CSV");
  const auto chart = radiometric::read_chart_csv(a.chart_csv);
  const auto curve = radiometric::fit_response(chart, {a.saturation, a.black});
  fs::path target(a.out);
  if (fs::is_directory(target) || !target.has_filename()) target /= "response.json";
  if (target.has_parent_path()) ensure_directory(target.parent_path());
  radiometric::write_response(target, curve);
  out << "gamma: " << num(curve.gamma) << "\ngain: " << num(curve.gain) << "\nresidual: " << num(curve.residual)
      << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string bundle;
  std::string response;
  std::optional<double> pitch_mm;
  double scale = 1.0;
  double eps_full = 0.02;
  double eps_z = 1e-3;
  double eps_nz = 0.05;
  std::string out;
  bool force = false;
};

void add_reconstruct(CLI::App& app, ReconstructArgs& a) {
  app.add_option("--bundle", a.bundle, "Capture bundle directory or ZIP")->required();
  app.add_option("--response", a.response, "Response curve JSON")->required();
  app.add_option("--pitch-mm", a.pitch_mm, "Pixel pitch on the object (mm); omitted = relative depth")
      ->check(CLI::PositiveNumber);
  app.add_option("--scale", a.scale, "Normal x/y scale factor");
  app.add_option("--eps-full", a.eps_full, "Minimum linear full-on intensity for a valid pixel");
  app.add_option("--eps-z", a.eps_z, "Minimum n_z after clamping");
  app.add_option("--eps-nz", a.eps_nz, "n_z floor when converting normals to gradients");
  app.add_option("--out", a.out, "Session directory")->required();
  app.add_flag("--force", a.force, "Overwrite existing results");
}

int run_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  require_exists(a.bundle, "bundle");
  require_exists(a.response, "response");
  const fs::path session(a.out);
  const fs::path results = session / "results";
  if (fs::exists(results) && !a.force)
    throw RefusedOverwrite{"results already exist in '" + session.string() + "' (use --force)"};

  const CaptureBundle bundle = load_bundle(a.bundle);
  const radiometric::ResponseCurve curve = radiometric::read_response(a.response);

  SessionLog log(out);
  log.line("reconstruct " + fs::path(a.bundle).string());
  log.value("frame_width", bundle.width());
  log.value("frame_height", bundle.height());
  log.value("gamma", curve.gamma);
  log.value("gain", curve.gain);
  log.value("scale", a.scale);

  const auto frames = radiometric::normalize_bundle(bundle, curve, a.eps_full);
  const normals::NormalMap nm = normals::recover_normals(frames, {a.scale, a.eps_z});
  const integrate::GradientField grad = integrate::gradients_from_normals(nm, a.eps_nz);
  const integrate::DepthMap depth = integrate::frankot_chellappa(grad, a.pitch_mm);
  const integrate::PointCloud cloud = integrate::depth_to_pointcloud(depth, nm.albedo, depth.mask);
  if (!a.pitch_mm && bundle.manifest.pixel_pitch_mm)
    log.line("note: manifest pixel_pitch_mm ignored without --pitch-mm; depth is relative");

  std::error_code ec;
  if (a.force) fs::remove_all(results, ec);
  ensure_directory(results);
  ensure_directory(session / "calibration");
  const fs::path bundle_copy = session / "bundle";
  if (!fs::exists(bundle_copy) || !fs::equivalent(bundle_copy, a.bundle)) save_bundle(bundle, bundle_copy);
  radiometric::write_response(session / "calibration" / "response.json", curve);

  write_png(results / "normals.png", normals::encode_normalmap_png(nm));
  normals::write_normal_grid(results / "normals.f32", results / "normals.json", nm);
  integrate::write_depth(results / "depth.png", results / "depth.json", depth);
  integrate::export_ply(cloud, results / "cloud.ply");
  ImageBuffer albedo = ImageBuffer::linear(nm.width(), nm.height());
  std::copy(nm.albedo.begin(), nm.albedo.end(), albedo.data().begin());
  write_png(results / "albedo.png", quantize(albedo, 8));

  const double pixels = static_cast<double>(nm.pixel_count());
  double z_min = 0.0;
  double z_max = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < depth.z.size(); ++i) {
    if (!depth.mask.valid(i)) continue;
    z_min = any ? std::min(z_min, depth.z[i]) : depth.z[i];
    z_max = any ? std::max(z_max, depth.z[i]) : depth.z[i];
    any = true;
  }
  const json summary = {{"valid_pixel_fraction", static_cast<double>(frames.mask.count()) / pixels},
                        {"clamped_pixel_fraction", static_cast<double>(nm.clamped.count()) / pixels},
                        {"depth_range_mm", z_max - z_min},
                        {"depth_units", depth.metric ? "mm" : "relative"}};
  write_text_file(results / "summary.json", summary.dump(2) + "\n");

  log.value("valid_pixel_fraction", summary["valid_pixel_fraction"].get<double>());
  log.value("clamped_pixel_fraction", summary["clamped_pixel_fraction"].get<double>());
  log.value("depth_range_mm", summary["depth_range_mm"].get<double>());
  log.line(std::string("depth_units: ") + (depth.metric ? "mm" : "relative"));
  log.value("vertices", static_cast<double>(cloud.vertices.size()));
  log.value("triangles", static_cast<double>(cloud.triangles.size()));
  log.append_to(session / "log.txt");
  return kSuccess;
}

// ---------------------------------------------------------------- unreflect-pose

struct UnreflectArgs {
  std::string calib;
  std::string out;
};

void add_unreflect(CLI::App& app, UnreflectArgs& a) {
  app.add_option("--calib", a.calib, "Calibration ingest JSON")->required();
  app.add_option("--out", a.out, "Output JSON with the real screen pose")->required();
}

int run_unreflect(const UnreflectArgs& a, std::ostream& out) {
  require_exists(a.calib, "calibration file");
  const auto in = geomcal::read_calibration(a.calib);
  const auto pose = geomcal::unreflect_pose(in.mirror_plane, in.virtual_screen_pose);
  json doc;
  json k = json::array();
  for (int r = 0; r < 3; ++r) k.push_back({in.camera_matrix(r, 0), in.camera_matrix(r, 1), in.camera_matrix(r, 2)});
  doc["camera_matrix"] = k;
  doc["screen_pose"] = geomcal::pose_to_json(pose);
  const fs::path target(a.out);
  if (target.has_parent_path()) ensure_directory(target.parent_path());
  write_text_file(target, doc.dump(2) + "\n");
  out << "translation_mm: " << num(pose.translation.x()) << ' ' << num(pose.translation.y()) << ' '
      << num(pose.translation.z()) << '\n';
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-illumination surface reconstruction toolkit", "gradscan"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  PatternsArgs patterns_args;
  SimulateArgs simulate_args;
  CalibrateArgs calibrate_args;
  ReconstructArgs reconstruct_args;
  UnreflectArgs unreflect_args;
  auto* patterns_cmd = app.add_subcommand("patterns", "Write the five illumination patterns as PNGs");
  add_patterns(*patterns_cmd, patterns_args);
  auto* simulate_cmd = app.add_subcommand("simulate", "Render a synthetic capture bundle with ground truth");
  add_simulate(*simulate_cmd, simulate_args);
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit the camera response from chart measurements");
  add_calibrate(*calibrate_cmd, calibrate_args);
  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Normals, depth and point cloud from a bundle");
  add_reconstruct(*reconstruct_cmd, reconstruct_args);
  auto* unreflect_cmd = app.add_subcommand("unreflect-pose", "Real screen pose from its mirror image");
  add_unreflect(*unreflect_cmd, unreflect_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (patterns_cmd->parsed()) return run_patterns(patterns_args, out);
    if (simulate_cmd->parsed()) return run_simulate(simulate_args, out);
    if (calibrate_cmd->parsed()) return run_calibrate(calibrate_args, out);
    if (reconstruct_cmd->parsed()) return run_reconstruct(reconstruct_args, out);
    if (unreflect_cmd->parsed()) return run_unreflect(unreflect_args, out);
  } catch (const RefusedOverwrite& e) {
    err << "error: " << e.what << '\n';
    return kRefusedOverwrite;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::io ? kIoError : kUsageError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kUsageError;
}

}  // namespace gradscan::cli
