#include "gradscan/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gradscan/error.hpp"

namespace gradscan {
namespace {

struct MemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, reader->data + reader->offset, length);
  reader->offset += length;
}

void write_callback(png_structp png, png_bytep in, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + length);
}

void flush_callback(png_structp) {}

// libpng reports errors through longjmp; every C++ object touched below is
// constructed before setjmp so no destructor is skipped.
bool encode_rows(const std::vector<std::uint8_t>& pixels, int width, int height, int channels,
                 int bit_depth, std::vector<std::uint8_t>& out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  const std::size_t stride =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) * (bit_depth / 8);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(r) * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct DecodedHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int channels = 0;
};

bool decode_rows(MemoryReader& reader, DecodedHeader& header, std::vector<std::uint8_t>& pixels) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, read_callback);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  }
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian order
  png_read_update_info(png, info);

  header.width = png_get_image_width(png, info);
  header.height = png_get_image_height(png, info);
  header.bit_depth = png_get_bit_depth(png, info);
  header.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * header.height);
  for (png_uint_32 r = 0; r < header.height; ++r) png_read_row(png, pixels.data() + r * stride, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  if (image.colorspace() != ColorSpace::raw) throw_invalid("PNG encoding requires a raw buffer");
  if (image.width() < 1 || image.height() < 1) throw_invalid("cannot encode an empty image");
  const int bytes = image.bit_depth() / 8;
  std::vector<std::uint8_t> pixels(image.size() * static_cast<std::size_t>(bytes));
  auto src = image.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto v = static_cast<std::uint32_t>(src[i]);
    if (bytes == 1) {
      pixels[i] = static_cast<std::uint8_t>(v);
    } else {
      pixels[2 * i] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
      pixels[2 * i + 1] = static_cast<std::uint8_t>(v & 0xffu);
    }
  }
  std::vector<std::uint8_t> out;
  if (!encode_rows(pixels, image.width(), image.height(), image.channels(), image.bit_depth(), out))
    throw_io("PNG encoding failed");
  return out;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw_io("not a PNG stream");
  MemoryReader reader{bytes.data(), bytes.size(), 0};
  DecodedHeader header;
  std::vector<std::uint8_t> pixels;
  if (!decode_rows(reader, header, pixels)) throw_io("PNG decoding failed");
  if (header.channels != 1 && header.channels != 3)
    throw_io("unsupported PNG channel layout (" + std::to_string(header.channels) + " channels)");

  ImageBuffer image = ImageBuffer::raw(static_cast<int>(header.width),
                                       static_cast<int>(header.height), header.channels,
                                       header.bit_depth);
  auto dst = image.data();
  if (header.bit_depth == 8) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pixels[i];
  } else {
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = static_cast<double>(pixels[2 * i] | (pixels[2 * i + 1] << 8));
  }
  return image;
}

ImageBuffer to_grayscale(const ImageBuffer& image) {
  if (image.channels() == 1) return image;
  ImageBuffer gray = ImageBuffer::raw(image.width(), image.height(), 1, image.bit_depth());
  auto src = image.data();
  auto dst = gray.data();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = std::floor((src[3 * i] + src[3 * i + 1] + src[3 * i + 2]) / 3.0 + 0.5);
  return gray;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_io("write to '" + path.string() + "' failed");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  write_file(path, encode_png(image));
}

ImageBuffer read_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace gradscan
