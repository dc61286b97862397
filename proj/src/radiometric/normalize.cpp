#include <algorithm>

#include "gradscan/error.hpp"
#include "gradscan/radiometric.hpp"

namespace gradscan::radiometric {

LinearFrames linearize_bundle(const CaptureBundle& bundle, const ResponseCurve& curve) {
  validate_bundle(bundle);
  LinearFrames out;
  for (PatternId id : kPatternSequence) out.emplace(id, linearize(bundle.frame(id), curve));
  return out;
}

NormalizedFrames normalize_frames(const LinearFrames& frames, double eps_full) {
  for (PatternId id : kPatternSequence) {
    if (!frames.contains(id)) throw_invalid("normalization needs all five frames");
  }
  const ImageBuffer& full = frames.at(PatternId::FullOn);
  for (const auto& [id, f] : frames) {
    if (f.colorspace() != ColorSpace::linear || f.channels() != 1)
      throw_invalid("normalization expects single-channel linear frames");
    if (!f.same_shape(full)) throw_invalid("frame dimensions differ");
  }

  const int w = full.width();
  const int h = full.height();
  NormalizedFrames out{ImageBuffer::linear(w, h), ImageBuffer::linear(w, h), ImageBuffer::linear(w, h),
                       ImageBuffer::linear(w, h), ValidityMask(w, h), ImageBuffer::linear(w, h)};
  const std::array<std::pair<PatternId, ImageBuffer*>, 4> gradients = {{
      {PatternId::GradXPos, &out.x_pos},
      {PatternId::GradXNeg, &out.x_neg},
      {PatternId::GradYPos, &out.y_pos},
      {PatternId::GradYNeg, &out.y_neg},
  }};

  auto full_data = full.data();
  auto albedo = out.albedo.data();
  for (std::size_t i = 0; i < full_data.size(); ++i) {
    // Pairwise sums keep the result bit-identical when x and y are swapped.
    const double sum_x = frames.at(PatternId::GradXPos).data()[i] + frames.at(PatternId::GradXNeg).data()[i];
    const double sum_y = frames.at(PatternId::GradYPos).data()[i] + frames.at(PatternId::GradYNeg).data()[i];
    albedo[i] = 0.25 * (sum_x + sum_y);

    const double denom = full_data[i];
    if (!(denom >= eps_full)) {
      out.mask.set(i, false);
      albedo[i] = 0.0;
      continue;
    }
    for (const auto& [id, dst] : gradients)
      dst->data()[i] = std::clamp(frames.at(id).data()[i] / denom, 0.0, 1.0);
  }
  return out;
}

NormalizedFrames normalize_bundle(const CaptureBundle& bundle, const ResponseCurve& curve, double eps_full) {
  return normalize_frames(linearize_bundle(bundle, curve), eps_full);
}

}  // namespace gradscan::radiometric
