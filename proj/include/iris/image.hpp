#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "iris/common.hpp"

namespace iris {

// ----------------------------------------------------------------------------
// Raster types
// ----------------------------------------------------------------------------

/// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw SpecError("image dimensions must be positive");
  }

  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  std::size_t size() const { return pixels.size(); }
};

/// Real-valued raster, row-major. Doubles so that statistical postconditions
/// hold to tight tolerances on full frames.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  FloatImage() = default;
  FloatImage(int w, int h, double fill = 0.0)
      : width(w), height(h),
        values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw SpecError("image dimensions must be positive");
  }

  double& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return values.size(); }
};

/// Binary per-pixel mask; 1 = usable pixel. Stored one byte per pixel for
/// cheap random access; file formats pack as needed.
struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  MaskImage() = default;
  MaskImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::uint8_t& at(int x, int y) {
    return bits[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
  }
};

struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// ----------------------------------------------------------------------------
// Sampling and geometry
// ----------------------------------------------------------------------------

/// Bilinear sample; coordinates outside the frame contribute 0.
inline double bilinear_sample(const GrayImage& img, double x, double y) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  double fx = x - x0, fy = y - y0;
  double acc = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      int xi = x0 + dx, yi = y0 + dy;
      if (!img.in_bounds(xi, yi)) continue;
      double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      acc += w * img.at(xi, yi);
    }
  }
  return acc;
}

inline double bilinear_sample(const FloatImage& img, double x, double y) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  double fx = x - x0, fy = y - y0;
  double acc = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      int xi = x0 + dx, yi = y0 + dy;
      if (xi < 0 || xi >= img.width || yi < 0 || yi >= img.height) continue;
      double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      acc += w * img.at(xi, yi);
    }
  }
  return acc;
}

/// Center used by rotations: the geometric center of the pixel grid.
inline Point image_center(int width, int height) {
  return {(width - 1) * 0.5, (height - 1) * 0.5};
}

/// Rotates a point about `center` by `degrees` (same convention as rotate()).
inline Point rotate_point(Point p, Point center, double degrees) {
  double rad = degrees * (3.14159265358979323846 / 180.0);
  double c = std::cos(rad), s = std::sin(rad);
  double dx = p.x - center.x, dy = p.y - center.y;
  return {center.x + c * dx - s * dy, center.y + s * dx + c * dy};
}

/// Rotates image content by `degrees` about the image center with bilinear
/// resampling. Samples falling outside the frame fill with 0; output size
/// equals input size.
inline GrayImage rotate(const GrayImage& img, double degrees) {
  if (std::abs(degrees) > 180.0)
    throw SpecError("rotation angle out of range [-180, 180]");
  if (degrees == 0.0) return img;
  GrayImage out(img.width, img.height, 0);
  Point c = image_center(img.width, img.height);
  double rad = degrees * (3.14159265358979323846 / 180.0);
  double cs = std::cos(rad), sn = std::sin(rad);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Inverse map: rotate destination by -degrees.
      double dx = x - c.x, dy = y - c.y;
      double sx = c.x + cs * dx + sn * dy;
      double sy = c.y - sn * dx + cs * dy;
      if (sx < -1.0 || sx > img.width || sy < -1.0 || sy > img.height) continue;
      double v = bilinear_sample(img, sx, sy);
      out.at(x, y) = static_cast<std::uint8_t>(
          std::clamp(std::lround(v), 0l, 255l));
    }
  }
  return out;
}

/// Mask rotation with nearest-neighbour sampling; outside fills with 0.
inline MaskImage rotate_mask(const MaskImage& mask, double degrees) {
  if (degrees == 0.0) return mask;
  MaskImage out(mask.width, mask.height, 0);
  Point c = image_center(mask.width, mask.height);
  double rad = degrees * (3.14159265358979323846 / 180.0);
  double cs = std::cos(rad), sn = std::sin(rad);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      double dx = x - c.x, dy = y - c.y;
      int sx = static_cast<int>(std::lround(c.x + cs * dx + sn * dy));
      int sy = static_cast<int>(std::lround(c.y - sn * dx + cs * dy));
      if (sx < 0 || sx >= mask.width || sy < 0 || sy >= mask.height) continue;
      out.at(x, y) = mask.at(sx, sy);
    }
  }
  return out;
}

// ----------------------------------------------------------------------------
// Intensity normalization
// ----------------------------------------------------------------------------

struct ZNormResult {
  FloatImage image;
  bool degenerate = false;  // constant input; output is all zeros
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Standardizes intensities to zero mean and unit population variance.
/// A constant input yields all zeros and sets the degenerate flag.
inline ZNormResult z_normalize(const FloatImage& img) {
  ZNormResult res;
  res.image = FloatImage(img.width, img.height, 0.0);
  const std::size_t n = img.size();
  double mean = 0.0;
  for (double v : img.values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : img.values) {
    double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  res.mean = mean;
  res.stddev = std::sqrt(var);
  if (res.stddev == 0.0) {
    res.degenerate = true;
    return res;
  }
  double inv = 1.0 / res.stddev;
  for (std::size_t i = 0; i < n; ++i)
    res.image.values[i] = (img.values[i] - mean) * inv;
  return res;
}

inline FloatImage to_float(const GrayImage& img) {
  FloatImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.size(); ++i)
    out.values[i] = static_cast<double>(img.pixels[i]);
  return out;
}

inline ZNormResult z_normalize(const GrayImage& img) {
  return z_normalize(to_float(img));
}

// ----------------------------------------------------------------------------
// Separable Gaussian blur (edge-clamped)
// ----------------------------------------------------------------------------

inline std::vector<double> gaussian_kernel(double sigma) {
  int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

inline FloatImage gaussian_blur(const FloatImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  std::vector<double> k = gaussian_kernel(sigma);
  int radius = static_cast<int>(k.size() / 2);
  FloatImage tmp(img.width, img.height), out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int xi = std::clamp(x + i, 0, img.width - 1);
        acc += k[i + radius] * img.at(xi, y);
      }
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int yi = std::clamp(y + i, 0, img.height - 1);
        acc += k[i + radius] * tmp.at(x, yi);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  FloatImage f = gaussian_blur(to_float(img), sigma);
  GrayImage out(img.width, img.height);
  for (std::size_t i = 0; i < f.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>(
        std::clamp(std::lround(f.values[i]), 0l, 255l));
  return out;
}

/// Bilinear resize with half-pixel centers (align_corners = false).
inline FloatImage resize_bilinear(const FloatImage& img, int w, int h) {
  if (w <= 0 || h <= 0) throw SpecError("resize dimensions must be positive");
  FloatImage out(w, h);
  double sx = static_cast<double>(img.width) / w;
  double sy = static_cast<double>(img.height) / h;
  for (int y = 0; y < h; ++y) {
    double srcy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    for (int x = 0; x < w; ++x) {
      double srcx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      out.at(x, y) = bilinear_sample(img, srcx, srcy);
    }
  }
  return out;
}

}  // namespace iris
