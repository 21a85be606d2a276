#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "iris/image.hpp"
#include "iris/synth.hpp"

namespace iris {

enum class SegMode { infant, adult_legacy };
enum class BoundaryPolarity { agnostic, dark, bright };

struct SegResult {
  Circle pupil;
  Circle iris;
  MaskImage mask;  // 1 = usable iris pixel
  double confidence = 0.0;
};

struct SegConfig {
  double preprocess_sigma = 1.0;   // light denoise before boundary search
  double pupil_profile_sigma = 2.0;  // radial-derivative smoothing, px
  double iris_profile_sigma = 4.0;
  double response_floor = 5.0;     // gray levels per px
  double pupil_r_min = 16.0;       // above the specular-highlight halo scale
  double pupil_r_max_frac = 0.25;  // of min(width, height)
  double iris_r_lo_factor = 1.5;   // iris radius search in [lo, hi] * r_pupil
  double iris_r_hi_factor = 5.0;
  double center_tol_factor = 0.25;  // iris center within this * r_pupil
  double wedge_half_deg = 45.0;     // lateral arcs used by segment()
  int saturation_level = 250;
  int saturation_dilate = 2;
  double lid_energy_floor = 10.0;   // gray levels per px
  double lid_prominence = 2.0;      // vs median row energy
  double confidence_scale = 20.0;
};

namespace detail {

/// Mean intensity along (parts of) a circle. Samples at or above `sat_skip`
/// (specular highlights) are ignored. Returns false when too few sample
/// points remain.
inline bool circle_mean(const FloatImage& img, double cx, double cy, double r,
                        const std::vector<double>& cos_tab,
                        const std::vector<double>& sin_tab, double sat_skip,
                        double& out) {
  double acc = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < cos_tab.size(); ++i) {
    double x = cx + r * cos_tab[i];
    double y = cy + r * sin_tab[i];
    if (x < 0.0 || x > img.width - 1.0 || y < 0.0 || y > img.height - 1.0)
      continue;
    double v = bilinear_sample(img, x, y);
    if (v >= sat_skip) continue;
    acc += v;
    ++n;
  }
  if (n < static_cast<int>(cos_tab.size() / 2)) return false;
  out = acc / n;
  return true;
}

/// Sample-angle tables: full circle, or two lateral wedges of +-wedge_half
/// degrees around the horizontal axis (avoids eyelids).
inline void angle_tables(int samples, double wedge_half_deg,
                         std::vector<double>& cos_tab,
                         std::vector<double>& sin_tab) {
  cos_tab.clear();
  sin_tab.clear();
  double wh = wedge_half_deg * M_PI / 180.0;
  if (wedge_half_deg >= 90.0) {
    for (int i = 0; i < samples; ++i) {
      double a = 2.0 * M_PI * i / samples;
      cos_tab.push_back(std::cos(a));
      sin_tab.push_back(std::sin(a));
    }
    return;
  }
  int half = std::max(4, samples / 2);
  for (int i = 0; i < half; ++i) {
    double a = -wh + 2.0 * wh * (i + 0.5) / half;
    cos_tab.push_back(std::cos(a));
    sin_tab.push_back(std::sin(a));
    cos_tab.push_back(-std::cos(a));
    sin_tab.push_back(std::sin(a));
  }
}

struct BoundaryHit {
  Circle circle;
  double response = 0.0;  // gray levels per px at the peak
};

struct SearchSpec {
  double cx_lo, cx_hi, cy_lo, cy_hi;  // center box
  double r_min, r_max;
  BoundaryPolarity polarity;
  double profile_sigma;
  double wedge_half_deg;
  double gray_per_unit;  // scale of img values back to gray levels
  double sat_skip = 1e300;  // image-unit level above which samples are ignored
};

/// Derivative-of-Gaussian taps: response(r) = sum_j w[j] * m(r + j*step)
/// equals d/dr of the sigma-smoothed profile.
inline std::vector<double> dog_taps(double sigma, double step, int& radius) {
  radius = std::max(2, static_cast<int>(std::ceil(3.0 * sigma / step)));
  std::vector<double> w(2 * radius + 1);
  const double norm = step / (sigma * sigma * sigma * std::sqrt(2.0 * M_PI));
  for (int j = -radius; j <= radius; ++j) {
    double u = j * step;
    w[j + radius] = u * norm * std::exp(-0.5 * u * u / (sigma * sigma));
  }
  return w;
}

/// Scores one center: peak of the Gaussian-smoothed radial derivative of the
/// circular mean profile over the radius grid. The profile is sampled beyond
/// the search range so the smoothing window never truncates.
inline bool score_center(const FloatImage& img, const SearchSpec& s, double cx,
                         double cy, double r_step,
                         const std::vector<double>& cos_tab,
                         const std::vector<double>& sin_tab, double& best_r,
                         double& best_resp) {
  int pad;
  std::vector<double> taps = dog_taps(s.profile_sigma, r_step, pad);
  int nr = static_cast<int>(std::floor((s.r_max - s.r_min) / r_step)) + 1;
  if (nr < 1) return false;
  int total = nr + 2 * pad;
  std::vector<double> prof(total);
  std::vector<bool> ok(total);
  for (int k = 0; k < total; ++k) {
    double r = s.r_min + (k - pad) * r_step;
    ok[k] = r >= 2.0 &&
            circle_mean(img, cx, cy, r, cos_tab, sin_tab, s.sat_skip, prof[k]);
  }
  bool found = false;
  for (int k = 0; k < nr; ++k) {
    double acc = 0.0;
    bool valid = true;
    for (int j = -pad; j <= pad; ++j) {
      if (!ok[k + pad + j]) {
        valid = false;
        break;
      }
      acc += taps[j + pad] * prof[k + pad + j];
    }
    if (!valid) continue;
    double d = acc * s.gray_per_unit;
    double score;
    switch (s.polarity) {
      case BoundaryPolarity::agnostic: score = std::abs(d); break;
      case BoundaryPolarity::dark: score = d; break;
      case BoundaryPolarity::bright: score = -d; break;
      default: score = 0.0; break;
    }
    if (!found || score > best_resp) {
      best_resp = score;
      best_r = s.r_min + k * r_step;
      found = true;
    }
  }
  return found;
}

/// Coarse-to-fine search over (cx, cy, r); integer grid then 0.25 px.
inline BoundaryHit boundary_search(const FloatImage& img, SearchSpec s) {
  if (s.r_min < 4.0) throw ConfigError("boundary search needs r_min >= 4 px");
  if (s.r_max >= std::min(img.width, img.height) / 2.0)
    throw ConfigError("boundary search needs r_max < min(w, h) / 2");
  if (s.r_max - s.r_min < 8.0) s.r_min = std::max(4.0, s.r_max - 8.0);

  std::vector<double> cos_c, sin_c, cos_f, sin_f;
  angle_tables(64, s.wedge_half_deg, cos_c, sin_c);
  angle_tables(128, s.wedge_half_deg, cos_f, sin_f);

  struct Best {
    double cx = 0, cy = 0, r = 0, resp = -1.0;
  } best;

  // Refinement stages stay inside the caller's radius bounds.
  const double r_floor = s.r_min, r_ceil = s.r_max;
  auto sweep = [&](double cx_lo, double cx_hi, double cy_lo, double cy_hi,
                   double c_step, double r_lo, double r_hi, double r_step,
                   const std::vector<double>& ct, const std::vector<double>& st) {
    SearchSpec local = s;
    local.r_min = std::max(r_lo, r_floor);
    local.r_max = std::min({r_hi, r_ceil,
                            std::min(img.width, img.height) / 2.0 - 1.0});
    Best stage;
    for (double cy = cy_lo; cy <= cy_hi + 1e-9; cy += c_step) {
      for (double cx = cx_lo; cx <= cx_hi + 1e-9; cx += c_step) {
        double r, resp;
        if (!score_center(img, local, cx, cy, r_step, ct, st, r, resp)) continue;
        if (resp > stage.resp) stage = {cx, cy, r, resp};
      }
    }
    return stage;
  };

  // Stage 1: coarse integer grid over the full center box.
  Best s1 = sweep(s.cx_lo, s.cx_hi, s.cy_lo, s.cy_hi, 4.0, s.r_min, s.r_max,
                  2.0, cos_c, sin_c);
  if (s1.resp < 0) throw NoBoundary("no circular boundary in search range");
  // Stage 2: unit grid around the stage-1 peak.
  Best s2 = sweep(s1.cx - 4, s1.cx + 4, s1.cy - 4, s1.cy + 4, 1.0,
                  s1.r - 5, s1.r + 5, 0.5, cos_f, sin_f);
  if (s2.resp < 0) s2 = s1;
  // Stage 3: sub-pixel refinement at 0.25 px.
  Best s3 = sweep(s2.cx - 1, s2.cx + 1, s2.cy - 1, s2.cy + 1, 0.25,
                  s2.r - 1.25, s2.r + 1.25, 0.25, cos_f, sin_f);
  if (s3.resp < 0) s3 = s2;
  return {{s3.cx, s3.cy, s3.r}, s3.resp};
}

}  // namespace detail

/// Single-boundary search on a raw image. The center hint is a rectangle;
/// polarity selects which radial transition is maximized. Throws NoBoundary
/// when the peak response stays under the configured floor.
inline Circle find_boundary(const GrayImage& img, double cx_lo, double cx_hi,
                            double cy_lo, double cy_hi, double r_min,
                            double r_max,
                            BoundaryPolarity polarity = BoundaryPolarity::agnostic,
                            const SegConfig& cfg = SegConfig{},
                            double wedge_half_deg = 180.0,
                            double* response_out = nullptr) {
  if (r_min < 4.0) throw ConfigError("r_min must be >= 4 px");
  if (r_max >= std::min(img.width, img.height) / 2.0)
    throw ConfigError("r_max must be < min(w, h) / 2");
  ZNormResult z = z_normalize(img);
  if (z.degenerate) throw NoBoundary("uniform image has no boundary");
  FloatImage f = gaussian_blur(z.image, cfg.preprocess_sigma);
  detail::SearchSpec s{cx_lo, cx_hi, cy_lo, cy_hi, r_min, r_max, polarity,
                       cfg.pupil_profile_sigma, wedge_half_deg, z.stddev,
                       (cfg.saturation_level - z.mean) / z.stddev};
  detail::BoundaryHit hit = detail::boundary_search(f, s);
  if (hit.response < cfg.response_floor)
    throw NoBoundary("peak boundary response below floor");
  if (response_out) *response_out = hit.response;
  return hit.circle;
}

/// Occlusion refinement: removes saturated highlights (dilated) and eyelid
/// bands found by horizontal-edge energy above/below the pupil. The result is
/// always a subset of the pupil-iris annulus.
inline MaskImage occlusion_refine(const GrayImage& img, const SegResult& seg,
                                  const SegConfig& cfg = SegConfig{}) {
  const int w = img.width, h = img.height;
  GrayImage smooth = gaussian_blur(img, cfg.preprocess_sigma);

  // Saturation map, dilated.
  MaskImage sat(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (smooth.at(x, y) >= cfg.saturation_level) sat.at(x, y) = 1;
  if (cfg.saturation_dilate > 0) {
    MaskImage dil(w, h, 0);
    int rad = cfg.saturation_dilate;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!sat.at(x, y)) continue;
        for (int dy = -rad; dy <= rad; ++dy)
          for (int dx = -rad; dx <= rad; ++dx) {
            int xi = x + dx, yi = y + dy;
            if (xi >= 0 && xi < w && yi >= 0 && yi < h) dil.at(xi, yi) = 1;
          }
      }
    sat = std::move(dil);
  }

  // Horizontal-edge energy per row, restricted to columns inside the iris.
  const Circle& ic = seg.iris;
  const Circle& pc = seg.pupil;
  int y_lo = std::max(1, static_cast<int>(std::ceil(ic.cy - ic.r)));
  int y_hi = std::min(h - 2, static_cast<int>(std::floor(ic.cy + ic.r)));
  std::vector<double> energy(h, 0.0);
  std::vector<int> counts(h, 0);
  for (int y = y_lo; y <= y_hi; ++y) {
    double acc = 0.0;
    int n = 0;
    for (int x = 0; x < w; ++x) {
      double di = std::hypot(x - ic.cx, y - ic.cy);
      if (di > ic.r - 2.0) continue;
      acc += std::abs(static_cast<double>(smooth.at(x, y + 1)) -
                      static_cast<double>(smooth.at(x, y - 1))) *
             0.5;
      ++n;
    }
    if (n >= 8) {
      energy[y] = acc / n;
      counts[y] = n;
    }
  }

  auto find_lid = [&](int from, int to) -> std::optional<int> {
    // Median of usable row energies as the prominence reference.
    std::vector<double> vals;
    for (int y = y_lo; y <= y_hi; ++y)
      if (counts[y] > 0) vals.push_back(energy[y]);
    if (vals.size() < 5) return std::nullopt;
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    double med = vals[vals.size() / 2];
    int best_y = -1;
    double best_e = 0.0;
    for (int y = std::max(from, y_lo); y <= std::min(to, y_hi); ++y) {
      if (counts[y] == 0) continue;
      if (energy[y] > best_e) {
        best_e = energy[y];
        best_y = y;
      }
    }
    if (best_y < 0) return std::nullopt;
    if (best_e < cfg.lid_energy_floor || best_e < cfg.lid_prominence * med)
      return std::nullopt;
    return best_y;
  };

  std::optional<int> top_lid =
      find_lid(y_lo, static_cast<int>(std::floor(pc.cy - pc.r)));
  std::optional<int> bot_lid =
      find_lid(static_cast<int>(std::ceil(pc.cy + pc.r)), y_hi);

  MaskImage mask(w, h, 0);
  int bx0 = std::max(0, static_cast<int>(std::floor(ic.cx - ic.r)));
  int bx1 = std::min(w - 1, static_cast<int>(std::ceil(ic.cx + ic.r)));
  int by0 = std::max(0, static_cast<int>(std::floor(ic.cy - ic.r)));
  int by1 = std::min(h - 1, static_cast<int>(std::ceil(ic.cy + ic.r)));
  for (int y = by0; y <= by1; ++y) {
    if (top_lid && y <= *top_lid) continue;
    if (bot_lid && y >= *bot_lid) continue;
    for (int x = bx0; x <= bx1; ++x) {
      double dp = std::hypot(x - pc.cx, y - pc.cy);
      double di = std::hypot(x - ic.cx, y - ic.cy);
      if (dp < pc.r + 1.0 || di > ic.r - 1.0) continue;
      if (sat.at(x, y)) continue;
      mask.at(x, y) = 1;
    }
  }
  return mask;
}

/// Full segmentation. Infant mode searches the pupil with a polarity-agnostic
/// operator; adult_legacy reproduces the adult assumption of a dark pupil.
/// Throws SegmentationFailed when either boundary cannot be located.
inline SegResult segment(const GrayImage& img, SegMode mode,
                         const SegConfig& cfg = SegConfig{}) {
  if (img.width < 160 || img.height < 120)
    throw ConfigError("segment requires at least a 160x120 image");
  ZNormResult z = z_normalize(img);
  if (z.degenerate)
    throw SegmentationFailed("uniform image");
  FloatImage f = gaussian_blur(z.image, cfg.preprocess_sigma);

  const double w = img.width, h = img.height;
  const double mindim = std::min(w, h);

  detail::SearchSpec pupil_spec;
  pupil_spec.cx_lo = w / 2.0 - w / 6.0;
  pupil_spec.cx_hi = w / 2.0 + w / 6.0;
  pupil_spec.cy_lo = h / 2.0 - h / 6.0;
  pupil_spec.cy_hi = h / 2.0 + h / 6.0;
  pupil_spec.r_min = cfg.pupil_r_min;
  pupil_spec.r_max = cfg.pupil_r_max_frac * mindim;
  pupil_spec.polarity = mode == SegMode::infant ? BoundaryPolarity::agnostic
                                                : BoundaryPolarity::dark;
  pupil_spec.profile_sigma = cfg.pupil_profile_sigma;
  pupil_spec.wedge_half_deg = cfg.wedge_half_deg;
  pupil_spec.gray_per_unit = z.stddev;
  pupil_spec.sat_skip = (cfg.saturation_level - z.mean) / z.stddev;

  detail::BoundaryHit pupil;
  try {
    pupil = detail::boundary_search(f, pupil_spec);
  } catch (const NoBoundary&) {
    throw SegmentationFailed("pupil boundary not found");
  }
  if (pupil.response < cfg.response_floor)
    throw SegmentationFailed("pupil boundary response below floor");

  detail::SearchSpec iris_spec = pupil_spec;
  double ctol = std::max(2.0, cfg.center_tol_factor * pupil.circle.r);
  iris_spec.cx_lo = pupil.circle.cx - ctol;
  iris_spec.cx_hi = pupil.circle.cx + ctol;
  iris_spec.cy_lo = pupil.circle.cy - ctol;
  iris_spec.cy_hi = pupil.circle.cy + ctol;
  iris_spec.r_min = cfg.iris_r_lo_factor * pupil.circle.r;
  iris_spec.r_max = std::min(cfg.iris_r_hi_factor * pupil.circle.r,
                             mindim / 2.0 - 1.0);
  iris_spec.polarity = BoundaryPolarity::agnostic;
  iris_spec.profile_sigma = cfg.iris_profile_sigma;

  detail::BoundaryHit limbus;
  try {
    limbus = detail::boundary_search(f, iris_spec);
  } catch (const NoBoundary&) {
    throw SegmentationFailed("iris boundary not found");
  } catch (const ConfigError&) {
    throw SegmentationFailed("iris search range collapsed");
  }
  if (limbus.response < cfg.response_floor)
    throw SegmentationFailed("iris boundary response below floor");

  SegResult seg;
  seg.pupil = pupil.circle;
  seg.iris = limbus.circle;
  seg.confidence =
      1.0 - std::exp(-(pupil.response + limbus.response) /
                     (2.0 * cfg.confidence_scale));
  seg.mask = occlusion_refine(img, seg, cfg);
  return seg;
}

}  // namespace iris
