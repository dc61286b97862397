#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gradscan {

enum class ColorSpace {
  raw,     // integer camera/display code values, 0 .. 2^bit_depth - 1
  linear,  // normalized linear intensity in [0, 1]
};

/// Row-major image with interleaved channels. Samples are held as doubles for
/// both color spaces; raw buffers carry integral values only.
class ImageBuffer {
 public:
  ImageBuffer() = default;

  /// Zero-filled raw buffer (bit_depth 8 or 16).
  static ImageBuffer raw(int width, int height, int channels, int bit_depth);
  /// Zero-filled linear buffer.
  static ImageBuffer linear(int width, int height, int channels = 1);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  ColorSpace colorspace() const noexcept { return colorspace_; }
  /// 8 or 16 for raw buffers, 0 for linear ones.
  int bit_depth() const noexcept { return bit_depth_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Largest representable code value (1.0 for linear buffers).
  double max_code() const noexcept;

  double& at(int row, int col, int channel = 0) {
    return data_[index(row, col, channel)];
  }
  double at(int row, int col, int channel = 0) const { return data_[index(row, col, channel)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Sample i mapped to [0, 1] (raw values divided by max_code()).
  double normalized(std::size_t i) const noexcept { return data_[i] / max_code(); }

  bool same_shape(const ImageBuffer& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  /// Throws Error(validation) if the buffer violates its invariants.
  void validate() const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  ImageBuffer(int width, int height, int channels, ColorSpace cs, int bit_depth);

  std::size_t index(int row, int col, int channel) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(channel);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  ColorSpace colorspace_ = ColorSpace::linear;
  int bit_depth_ = 0;
  std::vector<double> data_;
};

/// Quantizes a linear buffer to raw codes: round(v * (2^bit_depth - 1)),
/// clamped to the code range.
ImageBuffer quantize(const ImageBuffer& linear, int bit_depth);

/// Per-pixel validity flags. Invalid pixels are excluded from statistics and
/// exports downstream.
class ValidityMask {
 public:
  ValidityMask() = default;
  ValidityMask(int width, int height, bool initial = true);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return flags_.size(); }

  bool valid(int row, int col) const { return flags_[index(row, col)] != 0; }
  bool valid(std::size_t i) const { return flags_[i] != 0; }
  void set(int row, int col, bool v) { flags_[index(row, col)] = v ? 1 : 0; }
  void set(std::size_t i, bool v) { flags_[i] = v ? 1 : 0; }

  std::size_t count() const noexcept;

  /// Pointwise AND with a mask of the same dimensions.
  ValidityMask& operator&=(const ValidityMask& other);

  friend bool operator==(const ValidityMask&, const ValidityMask&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> flags_;
};

}  // namespace gradscan
