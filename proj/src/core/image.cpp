#include "gradscan/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gradscan/error.hpp"

namespace gradscan {

ImageBuffer::ImageBuffer(int width, int height, int channels, ColorSpace cs, int bit_depth)
    : width_(width), height_(height), channels_(channels), colorspace_(cs), bit_depth_(bit_depth) {
  if (width < 0 || height < 0) throw_invalid("image dimensions must be non-negative");
  if (channels != 1 && channels != 3) throw_invalid("image must have 1 or 3 channels");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), 0.0);
}

ImageBuffer ImageBuffer::raw(int width, int height, int channels, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw_invalid("unsupported bit depth " + std::to_string(bit_depth));
  return ImageBuffer(width, height, channels, ColorSpace::raw, bit_depth);
}

ImageBuffer ImageBuffer::linear(int width, int height, int channels) {
  return ImageBuffer(width, height, channels, ColorSpace::linear, 0);
}

double ImageBuffer::max_code() const noexcept {
  if (colorspace_ == ColorSpace::linear) return 1.0;
  return static_cast<double>((1u << bit_depth_) - 1u);
}

void ImageBuffer::validate() const {
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels_))
    throw_invalid("image data length does not match width x height x channels");
  const double hi = max_code();
  for (double v : data_) {
    if (!(v >= 0.0 && v <= hi))
      throw_invalid(colorspace_ == ColorSpace::linear ? "linear image value outside [0,1]"
                                                      : "raw image value outside code range");
    if (colorspace_ == ColorSpace::raw && v != std::floor(v))
      throw_invalid("raw image holds a non-integral value");
  }
}

ImageBuffer quantize(const ImageBuffer& linear, int bit_depth) {
  if (linear.colorspace() != ColorSpace::linear) throw_invalid("quantize expects a linear buffer");
  ImageBuffer out = ImageBuffer::raw(linear.width(), linear.height(), linear.channels(), bit_depth);
  const double hi = out.max_code();
  auto src = linear.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = std::clamp(std::floor(src[i] * hi + 0.5), 0.0, hi);
  return out;
}

ValidityMask::ValidityMask(int width, int height, bool initial)
    : width_(width), height_(height),
      flags_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), initial ? 1 : 0) {}

std::size_t ValidityMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

ValidityMask& ValidityMask::operator&=(const ValidityMask& other) {
  if (other.width_ != width_ || other.height_ != height_)
    throw_invalid("mask dimensions differ");
  for (std::size_t i = 0; i < flags_.size(); ++i) flags_[i] = flags_[i] & other.flags_[i];
  return *this;
}

}  // namespace gradscan
