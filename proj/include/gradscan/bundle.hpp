#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradscan/image.hpp"
#include "gradscan/pattern_id.hpp"

namespace gradscan {

inline constexpr const char* kBundleFormatVersion = "1.0";
inline constexpr const char* kManifestName = "manifest.json";

struct ChartRoi {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const ChartRoi&, const ChartRoi&) = default;
};

struct Manifest {
  std::string format_version = kBundleFormatVersion;
  std::vector<PatternId> pattern_sequence;
  std::map<PatternId, std::string> frame_files;
  int bit_depth = 8;
  std::optional<double> pixel_pitch_mm;
  std::string exposure_note;
  std::optional<ChartRoi> chart_roi;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Five frames plus their manifest: the unit of reconstruction input.
struct CaptureBundle {
  Manifest manifest;
  std::map<PatternId, ImageBuffer> frames;

  const ImageBuffer& frame(PatternId id) const;
  int width() const { return frame(PatternId::FullOn).width(); }
  int height() const { return frame(PatternId::FullOn).height(); }

  friend bool operator==(const CaptureBundle&, const CaptureBundle&) = default;
};

/// Default frame file name for a pattern ("frame_gx+.png", ...).
std::string default_frame_file(PatternId id);

/// Builds a bundle with the canonical sequence and default file names.
CaptureBundle make_bundle(std::map<PatternId, ImageBuffer> frames, int bit_depth,
                          std::optional<double> pixel_pitch_mm = std::nullopt,
                          std::string exposure_note = {});

nlohmann::json manifest_to_json(const Manifest& manifest);
/// Parses and validates the manifest schema (names the violated rule on failure).
Manifest manifest_from_json(const nlohmann::json& doc);

/// Checks every bundle invariant; throws Error(validation) naming the rule.
void validate_bundle(const CaptureBundle& bundle);

/// Loads a bundle from a directory or a ZIP archive with the same layout.
/// Color frames are reduced to grayscale by channel mean.
CaptureBundle load_bundle(const std::filesystem::path& path);

/// Writes a bundle as a directory, or as a ZIP archive when `path` ends in ".zip".
void save_bundle(const CaptureBundle& bundle, const std::filesystem::path& path);

}  // namespace gradscan
