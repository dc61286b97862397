#include "gradscan/patterns.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gradscan/error.hpp"
#include "gradscan/png_io.hpp"

namespace gradscan::patterns {

namespace fs = std::filesystem;

namespace {

// Rising and falling ramp values at index i of n samples. The larger of the
// two is computed directly and the smaller as max_level minus it; that
// subtraction is exact, so the pair always sums to max_level bit-for-bit.
std::pair<double, double> ramp_pair(int i, int n, double max_level) {
  const int last = n - 1;
  if (2 * i >= last) {
    const double rise = max_level * (static_cast<double>(i) / last);
    return {rise, max_level - rise};
  }
  const double fall = max_level * (static_cast<double>(last - i) / last);
  return {max_level - fall, fall};
}

}  // namespace

ImageBuffer render_pattern(const PatternSpec& spec) {
  if (spec.width < 2 || spec.height < 2) throw_invalid("pattern must be at least 2x2 pixels");
  if (!(spec.max_level > 0.0 && spec.max_level <= 1.0)) throw_invalid("pattern max_level must lie in (0,1]");

  ImageBuffer img = ImageBuffer::linear(spec.width, spec.height);
  for (int r = 0; r < spec.height; ++r) {
    const auto [y_pos, y_neg] = ramp_pair(r, spec.height, spec.max_level);
    for (int c = 0; c < spec.width; ++c) {
      const auto [x_pos, x_neg] = ramp_pair(c, spec.width, spec.max_level);
      double v = spec.max_level;
      switch (spec.id) {
        case PatternId::GradXPos: v = x_pos; break;
        case PatternId::GradXNeg: v = x_neg; break;
        case PatternId::GradYPos: v = y_pos; break;
        case PatternId::GradYNeg: v = y_neg; break;
        case PatternId::FullOn: break;
      }
      img.at(r, c) = v;
    }
  }
  return img;
}

fs::path pattern_file_name(PatternId id) { return "pattern_" + std::string(to_token(id)) + ".png"; }

ImageBuffer display_image(const PatternSpec& spec, double display_gamma) {
  if (!(display_gamma > 0.0)) throw_invalid("display gamma must be positive");
  ImageBuffer linear = render_pattern(spec);
  const double inv = 1.0 / display_gamma;
  for (double& v : linear.data()) v = std::pow(v, inv);
  return quantize(linear, 8);
}

std::vector<fs::path> emit_pattern_files(int width, int height, const fs::path& out_dir,
                                         double display_gamma) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw_io("cannot create output directory '" + out_dir.string() + "'");

  std::vector<fs::path> written;
  for (PatternId id : kPatternSequence) {
    const fs::path path = out_dir / pattern_file_name(id);
    write_png(path, display_image(PatternSpec{width, height, id, 1.0}, display_gamma));
    written.push_back(path);
  }
  return written;
}

}  // namespace gradscan::patterns
