#pragma once

#include <filesystem>
#include <vector>

#include "gradscan/image.hpp"
#include "gradscan/pattern_id.hpp"

namespace gradscan::patterns {

struct PatternSpec {
  int width = 0;
  int height = 0;
  PatternId id = PatternId::FullOn;
  double max_level = 1.0;
};

/// Linear-intensity screen pattern. Ramps are normalized over (width - 1)
/// and (height - 1) so both endpoints are hit exactly.
ImageBuffer render_pattern(const PatternSpec& spec);

/// File name the display tooling expects for a pattern ("pattern_gx+.png", ...).
std::filesystem::path pattern_file_name(PatternId id);

/// Writes all five patterns as 8-bit grayscale PNGs with display gamma
/// pre-compensation: code = round(255 * v^(1/display_gamma)).
/// Returns the written paths in display order.
std::vector<std::filesystem::path> emit_pattern_files(int width, int height,
                                                      const std::filesystem::path& out_dir,
                                                      double display_gamma = 2.2);

/// The 8-bit display image for one pattern (as written by emit_pattern_files).
ImageBuffer display_image(const PatternSpec& spec, double display_gamma);

}  // namespace gradscan::patterns
