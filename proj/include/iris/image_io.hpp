#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "iris/image.hpp"

namespace iris {

// ----------------------------------------------------------------------------
// PGM (P5, maxval 255)
// ----------------------------------------------------------------------------

namespace detail {

/// Reads the next header token, skipping whitespace and '#' comments.
inline std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace detail

inline GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic = detail::pgm_token(in);
  if (magic != "P5") throw FormatError("magic: expected P5, got '" + magic + "'");
  std::string ws = detail::pgm_token(in);
  std::string hs = detail::pgm_token(in);
  std::string ms = detail::pgm_token(in);
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(ws);
    h = std::stol(hs);
    maxval = std::stol(ms);
  } catch (const std::exception&) {
    throw FormatError("dims: non-numeric header field");
  }
  if (w <= 0 || h <= 0) throw FormatError("dims: nonpositive");
  if (maxval != 255)
    throw FormatError("maxval: expected 255, got " + ms);
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.size())
    throw FormatError("truncated: pixel data shorter than header declares");
  return img;
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// ----------------------------------------------------------------------------
// PNG (8-bit grayscale, no alpha)
// ----------------------------------------------------------------------------

inline GrayImage load_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw IoError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8)) {
    std::fclose(fp);
    throw FormatError("magic: not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw FormatError("corrupt PNG stream");
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    if (color != PNG_COLOR_TYPE_GRAY)
      throw FormatError("color type: expected grayscale without alpha");
    throw FormatError("bit depth: expected 8, got " + std::to_string(depth));
  }
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  {
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
      rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

inline void save_png(const GrayImage& img, const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoError("cannot write " + path.string());
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("PNG write failed: " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.pixels.data() +
                                    static_cast<std::size_t>(y) * img.width);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

// ----------------------------------------------------------------------------
// Extension dispatch
// ----------------------------------------------------------------------------

inline GrayImage load_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  if (ext == ".pgm") return load_pgm(path);
  if (ext == ".png") return load_png(path);
  throw FormatError("extension: unsupported image format '" + ext + "'");
}

inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  if (ext == ".pgm") return save_pgm(img, path);
  if (ext == ".png") return save_png(img, path);
  throw FormatError("extension: unsupported image format '" + ext + "'");
}

/// Masks persist as PGM rasters with 0 = excluded, 255 = usable.
inline void save_mask(const MaskImage& mask, const std::filesystem::path& path) {
  GrayImage img(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    img.pixels[i] = mask.bits[i] ? 255 : 0;
  save_image(img, path);
}

inline MaskImage load_mask(const std::filesystem::path& path) {
  GrayImage img = load_image(path);
  MaskImage mask(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    mask.bits[i] = img.pixels[i] >= 128 ? 1 : 0;
  return mask;
}

}  // namespace iris
