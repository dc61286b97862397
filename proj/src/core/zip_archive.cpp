#include "gradscan/zip_archive.hpp"

#include <zlib.h>

#include <fstream>
#include <limits>

#include "gradscan/error.hpp"

namespace gradscan::zip {
namespace {

constexpr std::uint32_t kLocalSignature = 0x04034b50;
constexpr std::uint32_t kCentralSignature = 0x02014b50;
constexpr std::uint32_t kEndSignature = 0x06054b50;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
constexpr std::uint16_t kUtf8Flag = 1u << 11;

class Writer {
 public:
  void u16(std::uint16_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v));
    u16(static_cast<std::uint16_t>(v >> 16));
  }
  void raw(std::span<const std::uint8_t> data) { bytes.insert(bytes.end(), data.begin(), data.end()); }
  void raw(const std::string& s) { bytes.insert(bytes.end(), s.begin(), s.end()); }

  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void seek(std::size_t offset) {
    if (offset > bytes_.size()) throw_io("ZIP offset out of range");
    pos_ = offset;
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    const std::uint32_t lo = u16();
    const std::uint32_t hi = u16();
    return lo | (hi << 16);
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw_io("truncated ZIP archive");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib's length argument is 32-bit; members here are far smaller.
  crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> deflate_raw(std::span<const std::uint8_t> data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw_io("deflate initialisation failed");
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(data.size())));
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw_io("deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> data, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  std::uint8_t sink = 0;
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw_io("inflate initialisation failed");
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.empty() ? &sink : out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) throw_io("corrupt deflate stream in ZIP member");
  return out;
}

}  // namespace

std::vector<std::uint8_t> write_archive(std::span<const Entry> entries, Method method) {
  struct Record {
    std::uint32_t crc;
    std::uint32_t compressed_size;
    std::uint32_t offset;
  };
  Writer w;
  std::vector<Record> records;
  records.reserve(entries.size());
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  for (const Entry& e : entries) {
    if (e.data.size() >= kMax) throw_io("ZIP member too large: " + e.name);
    const std::vector<std::uint8_t> payload =
        method == Method::deflate ? deflate_raw(e.data) : e.data;
    const Record rec{crc_of(e.data), static_cast<std::uint32_t>(payload.size()),
                     static_cast<std::uint32_t>(w.bytes.size())};
    w.u32(kLocalSignature);
    w.u16(kVersion);
    w.u16(kUtf8Flag);
    w.u16(static_cast<std::uint16_t>(method));
    w.u16(0);
    w.u16(kDosDate);
    w.u32(rec.crc);
    w.u32(rec.compressed_size);
    w.u32(static_cast<std::uint32_t>(e.data.size()));
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.u16(0);
    w.raw(e.name);
    w.raw(payload);
    records.push_back(rec);
  }
  const auto directory_offset = static_cast<std::uint32_t>(w.bytes.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    w.u32(kCentralSignature);
    w.u16(kVersion);
    w.u16(kVersion);
    w.u16(kUtf8Flag);
    w.u16(static_cast<std::uint16_t>(method));
    w.u16(0);
    w.u16(kDosDate);
    w.u32(records[i].crc);
    w.u32(records[i].compressed_size);
    w.u32(static_cast<std::uint32_t>(e.data.size()));
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.u16(0);
    w.u16(0);
    w.u16(0);
    w.u16(0);
    w.u32(0);
    w.u32(records[i].offset);
    w.raw(e.name);
  }
  const auto directory_size = static_cast<std::uint32_t>(w.bytes.size()) - directory_offset;
  w.u32(kEndSignature);
  w.u16(0);
  w.u16(0);
  w.u16(static_cast<std::uint16_t>(entries.size()));
  w.u16(static_cast<std::uint16_t>(entries.size()));
  w.u32(directory_size);
  w.u32(directory_offset);
  w.u16(0);
  return std::move(w.bytes);
}

std::vector<Entry> read_archive(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kEndRecordSize = 22;
  if (bytes.size() < kEndRecordSize) throw_io("file too small to be a ZIP archive");

  // The end-of-central-directory record sits before an optional comment.
  std::size_t end_pos = std::string::npos;
  const std::size_t earliest = bytes.size() > kEndRecordSize + 0xffff ? bytes.size() - kEndRecordSize - 0xffff : 0;
  for (std::size_t p = bytes.size() - kEndRecordSize + 1; p-- > earliest;) {
    if (bytes[p] == 0x50 && bytes[p + 1] == 0x4b && bytes[p + 2] == 0x05 && bytes[p + 3] == 0x06) {
      end_pos = p;
      break;
    }
  }
  if (end_pos == std::string::npos) throw_io("ZIP end-of-central-directory record not found");

  Reader r(bytes);
  r.seek(end_pos + 10);
  const std::uint16_t count = r.u16();
  r.u32();  // directory size
  const std::uint32_t directory_offset = r.u32();
  if (directory_offset == 0xffffffffu) throw_io("ZIP64 archives are not supported");

  std::vector<Entry> entries;
  entries.reserve(count);
  std::size_t cursor = directory_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    r.seek(cursor);
    if (r.u32() != kCentralSignature) throw_io("corrupt ZIP central directory");
    r.u16();
    r.u16();
    const std::uint16_t flags = r.u16();
    const std::uint16_t method = r.u16();
    r.u16();
    r.u16();
    const std::uint32_t crc = r.u32();
    const std::uint32_t compressed = r.u32();
    const std::uint32_t uncompressed = r.u32();
    const std::uint16_t name_len = r.u16();
    const std::uint16_t extra_len = r.u16();
    const std::uint16_t comment_len = r.u16();
    r.u16();
    r.u16();
    r.u32();
    const std::uint32_t local_offset = r.u32();
    auto name_bytes = r.take(name_len);
    cursor += 46u + name_len + extra_len + comment_len;

    if (flags & 0x1u) throw_io("encrypted ZIP members are not supported");
    Entry entry;
    entry.name.assign(name_bytes.begin(), name_bytes.end());

    r.seek(local_offset);
    if (r.u32() != kLocalSignature) throw_io("corrupt ZIP local header for " + entry.name);
    r.seek(local_offset + 26);
    const std::uint16_t local_name_len = r.u16();
    const std::uint16_t local_extra_len = r.u16();
    r.seek(local_offset + 30u + local_name_len + local_extra_len);
    auto payload = r.take(compressed);

    if (method == static_cast<std::uint16_t>(Method::store)) {
      if (compressed != uncompressed) throw_io("stored ZIP member size mismatch: " + entry.name);
      entry.data.assign(payload.begin(), payload.end());
    } else if (method == static_cast<std::uint16_t>(Method::deflate)) {
      entry.data = inflate_raw(payload, uncompressed);
    } else {
      throw_io("unsupported ZIP compression method " + std::to_string(method) + " for " + entry.name);
    }
    if (crc_of(entry.data) != crc) throw_io("CRC mismatch in ZIP member " + entry.name);
    entries.push_back(std::move(entry));
  }
  return entries;
}

bool looks_like_zip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[4] = {};
  if (!in.read(reinterpret_cast<char*>(sig), 4)) return false;
  return sig[0] == 0x50 && sig[1] == 0x4b &&
         ((sig[2] == 0x03 && sig[3] == 0x04) || (sig[2] == 0x05 && sig[3] == 0x06));
}

}  // namespace gradscan::zip
