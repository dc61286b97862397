#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gradscan::zip {

enum class Method : std::uint16_t { store = 0, deflate = 8 };

struct Entry {
  std::string name;
  std::vector<std::uint8_t> data;
};

/// Serializes entries into a single-disk ZIP archive (no ZIP64). Timestamps
/// are fixed so identical entries always produce identical archives.
std::vector<std::uint8_t> write_archive(std::span<const Entry> entries, Method method = Method::deflate);

/// Parses a ZIP archive using the central directory; supports stored and
/// deflated members and verifies each member's CRC-32.
std::vector<Entry> read_archive(std::span<const std::uint8_t> bytes);

/// True if the file starts with a ZIP local-file or end-of-directory signature.
bool looks_like_zip(const std::filesystem::path& path);

}  // namespace gradscan::zip
