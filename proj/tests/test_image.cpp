#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iris/image.hpp"
#include "iris/image_io.hpp"

using namespace iris;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  fs::path p = fs::temp_directory_path() / "iris_test_image";
  fs::create_directories(p);
  return p;
}

/// Smooth deterministic test pattern; wavelengths long enough that bilinear
/// resampling error stays well under a gray level.
GrayImage smooth_pattern(int w, int h) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 128.0 + 55.0 * std::sin(2.0 * M_PI * x / 24.0) *
                             std::cos(2.0 * M_PI * y / 30.0);
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
    }
  return img;
}

}  // namespace

TEST_CASE("pgm round trip is bit identical") {
  GrayImage img(640, 480);
  Rng rng(42);
  for (auto& p : img.pixels)
    p = static_cast<std::uint8_t>(rng.next_below(256));
  fs::path path = temp_dir() / "roundtrip.pgm";
  save_image(img, path);
  GrayImage back = load_image(path);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  REQUIRE(back.pixels == img.pixels);
}

TEST_CASE("png round trip is bit identical") {
  GrayImage img(64, 48);
  Rng rng(7);
  for (auto& p : img.pixels)
    p = static_cast<std::uint8_t>(rng.next_below(256));
  fs::path path = temp_dir() / "roundtrip.png";
  save_image(img, path);
  GrayImage back = load_image(path);
  REQUIRE(back.pixels == img.pixels);
}

TEST_CASE("2x2 save/load identity") {
  GrayImage img(2, 2);
  img.pixels = {0, 64, 128, 255};
  fs::path path = temp_dir() / "tiny.pgm";
  save_image(img, path);
  GrayImage back = load_image(path);
  REQUIRE(back.pixels == std::vector<std::uint8_t>({0, 64, 128, 255}));
}

TEST_CASE("pgm with 16-bit maxval is rejected naming maxval") {
  fs::path path = temp_dir() / "deep.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n2 2\n65535\n";
    for (int i = 0; i < 8; ++i) out.put('\0');
  }
  try {
    load_image(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    REQUIRE(std::string(e.what()).find("maxval") != std::string::npos);
  }
}

TEST_CASE("pgm with wrong magic is rejected") {
  fs::path path = temp_dir() / "color.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n2 2\n255\n";
    for (int i = 0; i < 12; ++i) out.put('\x40');
  }
  REQUIRE_THROWS_AS(load_image(path), FormatError);
}

TEST_CASE("truncated pgm is rejected") {
  fs::path path = temp_dir() / "short.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.put('\x01');
  }
  try {
    load_image(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    REQUIRE(std::string(e.what()).find("truncated") != std::string::npos);
  }
}

TEST_CASE("color png is rejected naming the color type") {
  // Hand-rolled 1x1 RGB PNG.
  fs::path path = temp_dir() / "rgb.png";
  static const unsigned char rgb_png[] = {
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
      0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
      0x08, 0x02, 0x00, 0x00, 0x00, 0x90, 0x77, 0x53, 0xde, 0x00, 0x00, 0x00,
      0x0c, 0x49, 0x44, 0x41, 0x54, 0x08, 0xd7, 0x63, 0xf8, 0xcf, 0xc0, 0x00,
      0x00, 0x00, 0x03, 0x00, 0x01, 0x87, 0xa1, 0x4e, 0xd4, 0x00, 0x00, 0x00,
      0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(rgb_png), sizeof(rgb_png));
  }
  try {
    load_image(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    REQUIRE(std::string(e.what()).find("color type") != std::string::npos);
  }
}

TEST_CASE("rotate by zero is the identity") {
  GrayImage img = smooth_pattern(80, 60);
  GrayImage out = rotate(img, 0.0);
  REQUIRE(out.pixels == img.pixels);
}

TEST_CASE("rotate preserves dimensions") {
  GrayImage img = smooth_pattern(123, 77);
  GrayImage out = rotate(img, 37.0);
  REQUIRE(out.width == img.width);
  REQUIRE(out.height == img.height);
}

TEST_CASE("rotate 90 degrees moves a bright pixel to the predicted cell") {
  // Oracle: forward-rotate the source point about the image center.
  GrayImage img(4, 4, 0);
  img.at(3, 1) = 255;
  Point c = image_center(4, 4);
  Point moved = rotate_point({3.0, 1.0}, c, 90.0);
  REQUIRE(moved.x == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(moved.y == Catch::Approx(3.0).margin(1e-12));
  GrayImage out = rotate(img, 90.0);
  REQUIRE(static_cast<int>(out.at(2, 3)) == 255);
  // The source cell no longer holds the bright value.
  REQUIRE(static_cast<int>(out.at(3, 1)) == 0);
}

TEST_CASE("rotate 15 then -15 returns close to the original away from borders") {
  GrayImage img = smooth_pattern(200, 160);
  GrayImage back = rotate(rotate(img, 15.0), -15.0);
  int margin = 60;
  int worst = 0;
  for (int y = margin; y < img.height - margin; ++y)
    for (int x = margin; x < img.width - margin; ++x)
      worst = std::max(worst, std::abs(static_cast<int>(img.at(x, y)) -
                                       static_cast<int>(back.at(x, y))));
  REQUIRE(worst <= 3);
}

TEST_CASE("z_normalize of a constant image is degenerate and all zero") {
  GrayImage img(16, 16, 128);
  ZNormResult r = z_normalize(img);
  REQUIRE(r.degenerate);
  for (double v : r.image.values) REQUIRE(v == 0.0);
}

TEST_CASE("z_normalize of [0, 2] gives [-1, +1]") {
  FloatImage img(2, 1);
  img.values = {0.0, 2.0};
  ZNormResult r = z_normalize(img);
  REQUIRE_FALSE(r.degenerate);
  REQUIRE(r.image.values[0] == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(r.image.values[1] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("z_normalize yields zero mean and unit variance") {
  GrayImage img = smooth_pattern(97, 53);
  ZNormResult r = z_normalize(img);
  double mean = 0.0;
  for (double v : r.image.values) mean += v;
  mean /= static_cast<double>(r.image.size());
  double var = 0.0;
  for (double v : r.image.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(r.image.size());
  REQUIRE(std::abs(mean) < 1e-9);
  REQUIRE(std::abs(var - 1.0) < 1e-9);
}

TEST_CASE("z_normalize is invariant under positive affine input transforms") {
  FloatImage img(40, 30);
  Rng rng(11);
  for (auto& v : img.values) v = rng.uniform(0.0, 100.0);
  ZNormResult base = z_normalize(img);
  FloatImage scaled(40, 30);
  for (std::size_t i = 0; i < img.size(); ++i)
    scaled.values[i] = 2.5 * img.values[i] + 17.0;
  ZNormResult other = z_normalize(scaled);
  for (std::size_t i = 0; i < img.size(); ++i)
    REQUIRE(std::abs(base.image.values[i] - other.image.values[i]) < 1e-6);
}

TEST_CASE("rotate rejects angles beyond 180 degrees") {
  GrayImage img(8, 8, 0);
  REQUIRE_THROWS_AS(rotate(img, 200.0), SpecError);
}
