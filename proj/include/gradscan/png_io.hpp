#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gradscan/image.hpp"

namespace gradscan {

/// Lossless PNG encoding of a raw-tagged buffer (1 or 3 channels, 8 or 16 bit).
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

/// Decodes gray, gray+alpha, RGB, RGBA or palette PNGs into a raw buffer with
/// 1 (gray) or 3 (color) channels. Alpha is discarded; sub-byte gray depths
/// are expanded to 8 bit.
ImageBuffer decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const ImageBuffer& image);
ImageBuffer read_png(const std::filesystem::path& path);

/// Collapses a 3-channel raw buffer to one channel using the channel mean.
ImageBuffer to_grayscale(const ImageBuffer& image);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gradscan
