#include "gradscan/bundle.hpp"

#include <algorithm>
#include <set>

#include "gradscan/error.hpp"
#include "gradscan/png_io.hpp"
#include "gradscan/zip_archive.hpp"

namespace gradscan {

namespace fs = std::filesystem;
using nlohmann::json;

const ImageBuffer& CaptureBundle::frame(PatternId id) const {
  auto it = frames.find(id);
  if (it == frames.end())
    throw_invalid("bundle has no frame for pattern '" + std::string(to_token(id)) + "'");
  return it->second;
}

std::string default_frame_file(PatternId id) { return "frame_" + std::string(to_token(id)) + ".png"; }

CaptureBundle make_bundle(std::map<PatternId, ImageBuffer> frames, int bit_depth,
                          std::optional<double> pixel_pitch_mm, std::string exposure_note) {
  CaptureBundle bundle;
  bundle.manifest.pattern_sequence.assign(kPatternSequence.begin(), kPatternSequence.end());
  for (PatternId id : kPatternSequence) bundle.manifest.frame_files[id] = default_frame_file(id);
  bundle.manifest.bit_depth = bit_depth;
  bundle.manifest.pixel_pitch_mm = pixel_pitch_mm;
  bundle.manifest.exposure_note = std::move(exposure_note);
  bundle.frames = std::move(frames);
  return bundle;
}

json manifest_to_json(const Manifest& m) {
  json doc;
  doc["format_version"] = m.format_version;
  json seq = json::array();
  for (PatternId id : m.pattern_sequence) seq.push_back(std::string(to_token(id)));
  doc["pattern_sequence"] = seq;
  json files = json::object();
  for (const auto& [id, name] : m.frame_files) files[std::string(to_token(id))] = name;
  doc["frame_files"] = files;
  doc["bit_depth"] = m.bit_depth;
  doc["pixel_pitch_mm"] = m.pixel_pitch_mm ? json(*m.pixel_pitch_mm) : json(nullptr);
  doc["exposure_note"] = m.exposure_note;
  if (m.chart_roi) {
    doc["chart_roi"] = {{"x", m.chart_roi->x},
                        {"y", m.chart_roi->y},
                        {"width", m.chart_roi->width},
                        {"height", m.chart_roi->height}};
  } else {
    doc["chart_roi"] = nullptr;
  }
  return doc;
}

namespace {

void check_version(const std::string& version) {
  const auto dot = version.find('.');
  const std::string major = version.substr(0, dot);
  if (major != "1") throw_invalid("unsupported manifest format_version '" + version + "'");
}

// Every manifest field, validated in declaration order.
Manifest parse_manifest(const json& doc) {
  if (!doc.is_object()) throw_invalid("manifest must be a JSON object");
  Manifest m;
  if (!doc.contains("format_version") || !doc["format_version"].is_string())
    throw_invalid("manifest is missing format_version");
  m.format_version = doc["format_version"].get<std::string>();
  check_version(m.format_version);

  if (!doc.contains("pattern_sequence") || !doc["pattern_sequence"].is_array())
    throw_invalid("manifest is missing pattern_sequence");
  for (const auto& token : doc["pattern_sequence"]) {
    if (!token.is_string()) throw_invalid("pattern_sequence entries must be strings");
    m.pattern_sequence.push_back(pattern_from_token(token.get<std::string>()));
  }

  if (!doc.contains("frame_files") || !doc["frame_files"].is_object())
    throw_invalid("manifest is missing frame_files");
  for (const auto& [token, name] : doc["frame_files"].items()) {
    if (!name.is_string()) throw_invalid("frame_files values must be file names");
    m.frame_files[pattern_from_token(token)] = name.get<std::string>();
  }

  if (!doc.contains("bit_depth") || !doc["bit_depth"].is_number_integer())
    throw_invalid("manifest is missing bit_depth");
  m.bit_depth = doc["bit_depth"].get<int>();

  if (doc.contains("pixel_pitch_mm") && !doc["pixel_pitch_mm"].is_null()) {
    if (!doc["pixel_pitch_mm"].is_number()) throw_invalid("pixel_pitch_mm must be a number");
    m.pixel_pitch_mm = doc["pixel_pitch_mm"].get<double>();
  }
  if (doc.contains("exposure_note") && !doc["exposure_note"].is_null())
    m.exposure_note = doc["exposure_note"].get<std::string>();
  if (doc.contains("chart_roi") && !doc["chart_roi"].is_null()) {
    const auto& roi = doc["chart_roi"];
    try {
      m.chart_roi = ChartRoi{roi.at("x").get<int>(), roi.at("y").get<int>(),
                             roi.at("width").get<int>(), roi.at("height").get<int>()};
    } catch (const json::exception&) {
      throw_invalid("chart_roi must hold integer x, y, width, height");
    }
  }
  return m;
}

void validate_manifest(const Manifest& m) {
  check_version(m.format_version);
  if (m.bit_depth != 8 && m.bit_depth != 16)
    throw_invalid("unsupported bit depth " + std::to_string(m.bit_depth));
  std::set<PatternId> seen;
  for (PatternId id : m.pattern_sequence) {
    if (!seen.insert(id).second)
      throw_invalid("pattern '" + std::string(to_token(id)) + "' listed more than once");
  }
  if (seen.size() != kPatternSequence.size()) throw_invalid("incomplete pattern set");
  if (m.pattern_sequence.back() != PatternId::FullOn)
    throw_invalid("full-on pattern must be last in pattern_sequence");
  for (PatternId id : kPatternSequence) {
    auto it = m.frame_files.find(id);
    if (it == m.frame_files.end() || it->second.empty())
      throw_invalid("frame_files has no entry for pattern '" + std::string(to_token(id)) + "'");
    const fs::path name(it->second);
    if (name.has_parent_path() || name.is_absolute() || it->second == "." || it->second == "..")
      throw_invalid("frame file '" + it->second + "' must be a plain file name");
  }
  if (m.frame_files.size() != kPatternSequence.size())
    throw_invalid("frame_files lists patterns outside the sequence");
  if (m.pixel_pitch_mm && !(*m.pixel_pitch_mm > 0.0))
    throw_invalid("pixel_pitch_mm must be positive");
  if (m.chart_roi && (m.chart_roi->width <= 0 || m.chart_roi->height <= 0 || m.chart_roi->x < 0 ||
                      m.chart_roi->y < 0))
    throw_invalid("chart_roi must be a non-empty rectangle with non-negative origin");
}

}  // namespace

Manifest manifest_from_json(const json& doc) {
  Manifest m = parse_manifest(doc);
  validate_manifest(m);
  return m;
}

void validate_bundle(const CaptureBundle& bundle) {
  validate_manifest(bundle.manifest);
  for (PatternId id : kPatternSequence) {
    if (!bundle.frames.contains(id))
      throw_invalid("missing frame for pattern '" + std::string(to_token(id)) + "'");
  }
  if (bundle.frames.size() != kPatternSequence.size()) throw_invalid("bundle holds unexpected frames");
  const ImageBuffer& ref = bundle.frames.at(PatternId::FullOn);
  for (const auto& [id, frame] : bundle.frames) {
    const std::string tag(to_token(id));
    if (frame.colorspace() != ColorSpace::raw) throw_invalid("frame '" + tag + "' is not raw-tagged");
    if (frame.channels() != 1) throw_invalid("frame '" + tag + "' is not grayscale");
    if (frame.width() != ref.width() || frame.height() != ref.height())
      throw_invalid("frame '" + tag + "' dimensions differ from the other frames");
    if (frame.bit_depth() != bundle.manifest.bit_depth)
      throw_invalid("frame '" + tag + "' bit depth differs from manifest bit_depth");
    if (frame.width() < 1 || frame.height() < 1) throw_invalid("frame '" + tag + "' is empty");
    frame.validate();
  }
  if (const auto& roi = bundle.manifest.chart_roi) {
    if (roi->x + roi->width > ref.width() || roi->y + roi->height > ref.height())
      throw_invalid("chart_roi exceeds frame bounds");
  }
}

namespace {

class FileSource {
 public:
  virtual ~FileSource() = default;
  virtual bool exists(const std::string& name) const = 0;
  virtual std::vector<std::uint8_t> read(const std::string& name) const = 0;
};

class DirectorySource final : public FileSource {
 public:
  explicit DirectorySource(fs::path root) : root_(std::move(root)) {}
  bool exists(const std::string& name) const override { return fs::is_regular_file(root_ / name); }
  std::vector<std::uint8_t> read(const std::string& name) const override { return read_file(root_ / name); }

 private:
  fs::path root_;
};

class ArchiveSource final : public FileSource {
 public:
  explicit ArchiveSource(std::vector<zip::Entry> entries) : entries_(std::move(entries)) {
    // Archives produced by zipping a folder nest everything one level down.
    for (const auto& e : entries_) {
      if (e.name == kManifestName) {
        prefix_.clear();
        return;
      }
      const std::string suffix = std::string("/") + kManifestName;
      if (e.name.size() > suffix.size() && e.name.ends_with(suffix) &&
          std::count(e.name.begin(), e.name.end(), '/') == 1)
        prefix_ = e.name.substr(0, e.name.size() - std::string(kManifestName).size());
    }
  }
  bool exists(const std::string& name) const override { return find(name) != nullptr; }
  std::vector<std::uint8_t> read(const std::string& name) const override {
    const zip::Entry* e = find(name);
    if (e == nullptr) throw_invalid("archive has no member '" + name + "'");
    return e->data;
  }

 private:
  const zip::Entry* find(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == prefix_ + name) return &e;
    return nullptr;
  }

  std::vector<zip::Entry> entries_;
  std::string prefix_;
};

CaptureBundle load_from(const FileSource& src) {
  if (!src.exists(kManifestName)) throw_invalid("bundle has no manifest.json");
  json doc;
  try {
    const auto bytes = src.read(kManifestName);
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw_invalid(std::string("manifest.json is not valid JSON: ") + e.what());
  }
  CaptureBundle bundle;
  bundle.manifest = manifest_from_json(doc);
  for (PatternId id : kPatternSequence) {
    const std::string& name = bundle.manifest.frame_files.at(id);
    if (!src.exists(name)) throw_invalid("missing frame file '" + name + "'");
    ImageBuffer frame;
    try {
      frame = to_grayscale(decode_png(src.read(name)));
    } catch (const Error& e) {
      throw_invalid("frame file '" + name + "': " + e.what());
    }
    bundle.frames.emplace(id, std::move(frame));
  }
  validate_bundle(bundle);
  return bundle;
}

}  // namespace

CaptureBundle load_bundle(const fs::path& path) {
  if (fs::is_directory(path)) return load_from(DirectorySource(path));
  if (!fs::exists(path)) throw_invalid("bundle path '" + path.string() + "' does not exist");
  if (!zip::looks_like_zip(path)) throw_invalid("'" + path.string() + "' is neither a directory nor a ZIP archive");
  return load_from(ArchiveSource(zip::read_archive(read_file(path))));
}

void save_bundle(const CaptureBundle& bundle, const fs::path& path) {
  validate_bundle(bundle);
  std::vector<zip::Entry> entries;
  const std::string manifest_text = manifest_to_json(bundle.manifest).dump(2) + "\n";
  entries.push_back({kManifestName, std::vector<std::uint8_t>(manifest_text.begin(), manifest_text.end())});
  for (PatternId id : bundle.manifest.pattern_sequence)
    entries.push_back({bundle.manifest.frame_files.at(id), encode_png(bundle.frames.at(id))});

  if (path.extension() == ".zip") {
    if (path.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(path.parent_path(), ec);
    }
    write_file(path, zip::write_archive(entries));
    return;
  }
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw_io("cannot create bundle directory '" + path.string() + "'");
  for (const auto& e : entries) write_file(path / e.name, e.data);
}

}  // namespace gradscan
