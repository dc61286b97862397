#include <gtest/gtest.h>

#include <random>

#include "gradscan/bundle.hpp"
#include "gradscan/error.hpp"
#include "gradscan/png_io.hpp"
#include "gradscan/zip_archive.hpp"
#include "test_support.hpp"

using namespace gradscan;
using gradscan::testing::TempDir;
namespace fs = std::filesystem;

namespace {

ImageBuffer random_raw(int w, int h, int channels, int bit_depth, std::uint32_t seed) {
  ImageBuffer img = ImageBuffer::raw(w, h, channels, bit_depth);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(0, (1 << bit_depth) - 1);
  for (double& v : img.data()) v = dist(rng);
  return img;
}

CaptureBundle random_bundle(int w, int h, int bit_depth, std::uint32_t seed) {
  std::map<PatternId, ImageBuffer> frames;
  for (PatternId id : kPatternSequence) frames.emplace(id, random_raw(w, h, 1, bit_depth, seed++));
  return make_bundle(std::move(frames), bit_depth, 0.1, "locked exposure 1/60 s");
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST(ImageBuffer, ValidateChecksRangeAndIntegrality) {
  ImageBuffer lin = ImageBuffer::linear(2, 2);
  lin.at(1, 1) = 1.5;
  EXPECT_THROW(lin.validate(), Error);
  ImageBuffer raw = ImageBuffer::raw(2, 2, 1, 8);
  raw.at(0, 0) = 3.5;
  EXPECT_THROW(raw.validate(), Error);
  raw.at(0, 0) = 255;
  EXPECT_NO_THROW(raw.validate());
  EXPECT_THROW(ImageBuffer::raw(2, 2, 1, 12), Error);
  EXPECT_EQ(raw.size(), 4u);
}

TEST(ImageBuffer, QuantizeRoundsHalfUpAndClamps) {
  ImageBuffer lin = ImageBuffer::linear(4, 1);
  lin.at(0, 0) = 0.0;
  lin.at(0, 1) = 0.5;  // 127.5 -> 128
  lin.at(0, 2) = 1.0;
  lin.at(0, 3) = 2.0 / 255.0;
  const ImageBuffer q = quantize(lin, 8);
  EXPECT_EQ(q.at(0, 0), 0);
  EXPECT_EQ(q.at(0, 1), 128);
  EXPECT_EQ(q.at(0, 2), 255);
  EXPECT_EQ(q.at(0, 3), 2);
}

TEST(ValidityMask, CountAndIntersection) {
  ValidityMask a(3, 2);
  ValidityMask b(3, 2);
  a.set(0, 1, false);
  b.set(1, 2, false);
  a &= b;
  EXPECT_EQ(a.count(), 4u);
  EXPECT_FALSE(a.valid(1, 2));
  EXPECT_THROW(a &= ValidityMask(2, 2), Error);
}

TEST(PatternId, TokensRoundTrip) {
  for (PatternId id : kPatternSequence) EXPECT_EQ(pattern_from_token(to_token(id)), id);
  EXPECT_EQ(to_token(PatternId::GradYNeg), "gy-");
  EXPECT_EQ(to_token(PatternId::FullOn), "full");
  EXPECT_THROW(pattern_from_token("gz+"), Error);
}

TEST(Png, RandomImagesRoundTripBitExact) {
  std::uint32_t seed = 1;
  for (int depth : {8, 16}) {
    for (int channels : {1, 3}) {
      for (int trial = 0; trial < 3; ++trial) {
        const ImageBuffer img = random_raw(7 + trial * 13, 5 + trial * 3, channels, depth, seed++);
        EXPECT_EQ(decode_png(encode_png(img)), img) << "depth " << depth << " channels " << channels;
      }
    }
  }
}

TEST(Png, EncodingIsDeterministic) {
  const ImageBuffer img = random_raw(31, 17, 1, 16, 9);
  EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(Png, ColorReducesToChannelMean) {
  ImageBuffer rgb = ImageBuffer::raw(2, 1, 3, 8);
  rgb.at(0, 0, 0) = 10;
  rgb.at(0, 0, 1) = 20;
  rgb.at(0, 0, 2) = 31;  // mean 20.33 -> 20
  rgb.at(0, 1, 0) = rgb.at(0, 1, 1) = rgb.at(0, 1, 2) = 200;
  const ImageBuffer gray = to_grayscale(decode_png(encode_png(rgb)));
  EXPECT_EQ(gray.channels(), 1);
  EXPECT_EQ(gray.at(0, 0), 20);
  EXPECT_EQ(gray.at(0, 1), 200);
}

TEST(Png, RejectsGarbage) {
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(decode_png(junk), Error);
  auto good = encode_png(random_raw(4, 4, 1, 8, 3));
  good.resize(good.size() / 2);
  EXPECT_THROW(decode_png(good), Error);
}

TEST(Zip, StoreAndDeflateRoundTrip) {
  std::vector<zip::Entry> entries = {{"a.txt", {'h', 'i'}}, {"dir/b.bin", std::vector<std::uint8_t>(5000, 7)}, {"empty", {}}};
  for (auto method : {zip::Method::store, zip::Method::deflate}) {
    const auto bytes = zip::write_archive(entries, method);
    const auto back = zip::read_archive(bytes);
    ASSERT_EQ(back.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      EXPECT_EQ(back[i].name, entries[i].name);
      EXPECT_EQ(back[i].data, entries[i].data);
    }
  }
  EXPECT_LT(zip::write_archive(entries, zip::Method::deflate).size(),
            zip::write_archive(entries, zip::Method::store).size());
}

TEST(Zip, DetectsCorruption) {
  std::vector<zip::Entry> entries = {{"x", std::vector<std::uint8_t>(64, 1)}};
  auto bytes = zip::write_archive(entries, zip::Method::store);
  bytes[30 + 1 + 10] ^= 0xff;  // inside the stored payload
  EXPECT_THROW(zip::read_archive(bytes), Error);
  EXPECT_THROW(zip::read_archive(std::vector<std::uint8_t>(10, 0)), Error);
}

TEST(Manifest, GoldenSchema) {
  CaptureBundle b = random_bundle(4, 3, 8, 1);
  b.manifest.chart_roi = ChartRoi{1, 0, 2, 2};
  const std::string text = manifest_to_json(b.manifest).dump(2) + "\n";
  const std::string golden = read_text_file(fs::path(GRADSCAN_GOLDEN_DIR) / "manifest.json");
  EXPECT_EQ(text, golden);
  EXPECT_EQ(manifest_from_json(nlohmann::json::parse(golden)), b.manifest);
}

TEST(Manifest, OptionalFieldsMayBeNullOrAbsent) {
  nlohmann::json doc = manifest_to_json(random_bundle(2, 2, 8, 1).manifest);
  doc.erase("chart_roi");
  doc.erase("exposure_note");
  doc["pixel_pitch_mm"] = nullptr;
  const Manifest m = manifest_from_json(doc);
  EXPECT_FALSE(m.pixel_pitch_mm.has_value());
  EXPECT_FALSE(m.chart_roi.has_value());
}

TEST(Manifest, ValidationNamesTheViolatedRule) {
  const nlohmann::json base = manifest_to_json(random_bundle(2, 2, 8, 1).manifest);

  auto four = base;
  four["pattern_sequence"].erase(1);
  EXPECT_NE(error_of([&] { manifest_from_json(four); }).find("incomplete pattern set"), std::string::npos);

  auto dup = base;
  dup["pattern_sequence"][1] = "gx+";
  EXPECT_NE(error_of([&] { manifest_from_json(dup); }).find("more than once"), std::string::npos);

  auto unknown = base;
  unknown["pattern_sequence"][0] = "diag";
  EXPECT_NE(error_of([&] { manifest_from_json(unknown); }).find("unknown pattern id"), std::string::npos);

  auto order = base;
  order["pattern_sequence"] = {"full", "gx+", "gx-", "gy+", "gy-"};
  EXPECT_NE(error_of([&] { manifest_from_json(order); }).find("must be last"), std::string::npos);

  auto depth = base;
  depth["bit_depth"] = 12;
  EXPECT_NE(error_of([&] { manifest_from_json(depth); }).find("unsupported bit depth"), std::string::npos);

  auto version = base;
  version["format_version"] = "2.0";
  EXPECT_NE(error_of([&] { manifest_from_json(version); }).find("format_version"), std::string::npos);
  version["format_version"] = "1.7";
  EXPECT_NO_THROW(manifest_from_json(version));

  auto escape = base;
  escape["frame_files"]["gx+"] = "../frame.png";
  EXPECT_NE(error_of([&] { manifest_from_json(escape); }).find("plain file name"), std::string::npos);
}

TEST(Bundle, LoadsDirectoryOfFive8BitFrames) {
  TempDir dir("bundle8");
  const CaptureBundle b = random_bundle(640, 480, 8, 11);
  save_bundle(b, dir.path());
  const CaptureBundle back = load_bundle(dir.path());
  EXPECT_EQ(back.frames.size(), 5u);
  EXPECT_EQ(back.manifest.bit_depth, 8);
  EXPECT_EQ(back.width(), 640);
  EXPECT_EQ(back.height(), 480);
  EXPECT_EQ(back, b);
}

TEST(Bundle, SixteenBitSurvivesDirectoryAndZip) {
  TempDir dir("bundle16");
  const CaptureBundle b = random_bundle(33, 21, 16, 5);
  save_bundle(b, dir / "d");
  save_bundle(b, dir / "b.zip");
  EXPECT_EQ(load_bundle(dir / "d"), b);
  EXPECT_EQ(load_bundle(dir / "b.zip"), b);
  // Saving twice produces byte-identical archives.
  save_bundle(b, dir / "c.zip");
  EXPECT_EQ(read_file(dir / "b.zip"), read_file(dir / "c.zip"));
}

TEST(Bundle, LoadsZipWithNestedFolderAndStoredMembers) {
  TempDir dir("nested");
  const CaptureBundle b = random_bundle(8, 6, 8, 2);
  save_bundle(b, dir / "plain");
  std::vector<zip::Entry> entries;
  for (const auto& e : fs::directory_iterator(dir / "plain"))
    entries.push_back({"capture/" + e.path().filename().string(), read_file(e.path())});
  write_file(dir / "ui.zip", zip::write_archive(entries, zip::Method::store));
  EXPECT_EQ(load_bundle(dir / "ui.zip"), b);
}

TEST(Bundle, ColorFramesAreReducedToGray) {
  TempDir dir("color");
  CaptureBundle b = random_bundle(5, 4, 8, 3);
  save_bundle(b, dir.path());
  ImageBuffer rgb = ImageBuffer::raw(5, 4, 3, 8);
  const ImageBuffer& gray = b.frames.at(PatternId::GradXPos);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c)
      for (int ch = 0; ch < 3; ++ch) rgb.at(r, c, ch) = gray.at(r, c);
  write_png(dir / default_frame_file(PatternId::GradXPos), rgb);
  EXPECT_EQ(load_bundle(dir.path()), b);
}

TEST(Bundle, LoadErrors) {
  TempDir dir("errors");
  const CaptureBundle b = random_bundle(6, 4, 8, 7);

  save_bundle(b, dir / "missing");
  fs::remove(dir / "missing" / default_frame_file(PatternId::GradYNeg));
  EXPECT_NE(error_of([&] { load_bundle(dir / "missing"); }).find("missing frame file"), std::string::npos);

  save_bundle(b, dir / "dims");
  write_png(dir / "dims" / default_frame_file(PatternId::GradXNeg), random_raw(7, 4, 1, 8, 1));
  EXPECT_NE(error_of([&] { load_bundle(dir / "dims"); }).find("dimensions differ"), std::string::npos);

  save_bundle(b, dir / "depth");
  write_png(dir / "depth" / default_frame_file(PatternId::GradXNeg), random_raw(6, 4, 1, 16, 1));
  EXPECT_NE(error_of([&] { load_bundle(dir / "depth"); }).find("bit depth"), std::string::npos);

  save_bundle(b, dir / "nomanifest");
  fs::remove(dir / "nomanifest" / "manifest.json");
  EXPECT_NE(error_of([&] { load_bundle(dir / "nomanifest"); }).find("manifest"), std::string::npos);

  EXPECT_THROW(load_bundle(dir / "does-not-exist"), Error);
}

TEST(Bundle, SaveToUnwritableLocationIsIoError) {
  TempDir dir("readonly");
  write_text_file(dir / "file", "x");
  const CaptureBundle b = random_bundle(4, 4, 8, 1);
  try {
    save_bundle(b, dir / "file" / "bundle");
    FAIL() << "expected an I/O error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Bundle, SaveRejectsInvalidBundles) {
  TempDir dir("invalid");
  CaptureBundle b = random_bundle(4, 4, 8, 1);
  b.frames.erase(PatternId::GradYPos);
  EXPECT_THROW(save_bundle(b, dir / "x"), Error);
}
