#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "iris/common.hpp"
#include "iris/image.hpp"

namespace iris {

enum class Polarity { bright_pupil, dark_pupil };

inline std::string to_string(Polarity p) {
  return p == Polarity::bright_pupil ? "bright_pupil" : "dark_pupil";
}

inline Polarity polarity_from_string(const std::string& s) {
  if (s == "bright_pupil") return Polarity::bright_pupil;
  if (s == "dark_pupil") return Polarity::dark_pupil;
  throw ConfigError("unknown polarity '" + s + "'");
}

/// Everything that defines one rendered eye. Identical specs render to
/// bit-identical images.
struct EyeSpec {
  std::uint64_t identity_seed = 1;
  std::uint64_t session_seed = 1;
  Polarity polarity = Polarity::bright_pupil;
  double iris_radius = 105.0;            // px
  double pupil_to_iris_ratio = 0.5;      // (0.1, 0.9)
  double eyelid_coverage = 0.15;         // [0, 0.4]
  int highlight_count = 2;
  double blur_sigma = 0.0;               // extra defocus on top of session blur
  int canvas_width = 640;
  int canvas_height = 480;
};

struct EyeAnnotation {
  Circle pupil;
  Circle iris;
  MaskImage occlusion;  // 1 = usable iris pixel
};

/// Session-variation and intensity constants for the renderer.
struct SynthConfig {
  double rotation_jitter_deg = 10.0;  // iris pattern rotation per session
  double ratio_jitter = 0.08;         // pupil dilation per session
  double noise_sigma = 4.0;           // additive sensor noise, gray levels
  double session_blur_min = 0.5;      // per-session defocus range, px
  double session_blur_max = 1.5;

  double iris_base = 104.0;   // mean iris intensity
  double iris_amp = 18.0;     // texture standard deviation, gray levels
  double sclera_level = 182.0;
  double skin_level = 190.0;
  double pupil_bright = 205.0;
  double pupil_dark = 30.0;
  double limbus_blend_px = 2.5;  // soft iris/sclera transition half-width
};

namespace detail {

/// Lattice value in [-1, 1], a pure function of (identity, octave, cell).
inline double noise_node(std::uint64_t identity_seed, int octave, int ir,
                         int itheta) {
  std::uint64_t s = identity_seed;
  s = mix_seed(s, 0x6f63740000ull + static_cast<std::uint64_t>(octave));
  s = mix_seed(s, static_cast<std::uint64_t>(ir) * 0x10001ull + 7);
  s = mix_seed(s, static_cast<std::uint64_t>(itheta) + 13);
  std::uint64_t z = s;
  return (static_cast<double>(splitmix64(z) >> 11) * 0x1.0p-53) * 2.0 - 1.0;
}

/// Band-limited value-noise texture over the iris annulus, parameterized by
/// radial fraction t in [0,1] and angle theta. Anchored to the iris so the
/// pattern rotates and dilates with the eye. Lattices are precomputed per
/// identity; three octaves cover roughly 4-32 cycles per iris.
class IrisTexture {
 public:
  explicit IrisTexture(std::uint64_t identity_seed) {
    for (int k = 0; k < 3; ++k) {
      lattice_[k].resize(static_cast<std::size_t>(kThetaCells[k]) *
                         (kRadCells[k] + 1));
      for (int ir = 0; ir <= kRadCells[k]; ++ir)
        for (int it = 0; it < kThetaCells[k]; ++it)
          lattice_[k][static_cast<std::size_t>(ir) * kThetaCells[k] + it] =
              noise_node(identity_seed, k, ir, it);
    }
  }

  /// Roughly unit-variance field value at (t, theta).
  double sample(double t, double theta) const {
    constexpr double kTwoPi = 6.283185307179586476925287;
    double a = theta * (1.0 / kTwoPi);
    a -= std::floor(a);  // [0,1)
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      int nt = kThetaCells[k], nr = kRadCells[k];
      double ft = a * nt;
      int it = static_cast<int>(ft);
      if (it >= nt) it = nt - 1;
      double fu = ft - it;
      double fr = std::clamp(t, 0.0, 1.0) * nr;
      int irad = std::min(static_cast<int>(fr), nr - 1);
      double fv = fr - irad;
      int it1 = (it + 1) % nt;
      const double* row0 = &lattice_[k][static_cast<std::size_t>(irad) * nt];
      const double* row1 = row0 + nt;
      double v = (1 - fv) * ((1 - fu) * row0[it] + fu * row0[it1]) +
                 fv * ((1 - fu) * row1[it] + fu * row1[it1]);
      sum += kWeight[k] * v;
    }
    // Normalizes the octave sum to approximately unit standard deviation.
    return sum * kScale;
  }

 private:
  static constexpr int kThetaCells[3] = {8, 16, 32};
  static constexpr int kRadCells[3] = {2, 2, 4};
  static constexpr double kWeight[3] = {1.0, 0.75, 0.55};
  static constexpr double kScale = 1.9;
  std::vector<double> lattice_[3];
};

struct Highlight {
  double x, y, r;
};

}  // namespace detail

inline void validate_spec(const EyeSpec& spec) {
  if (spec.pupil_to_iris_ratio <= 0.1 || spec.pupil_to_iris_ratio >= 0.9)
    throw SpecError("pupil_to_iris_ratio must lie in (0.1, 0.9)");
  if (spec.iris_radius <= 0) throw SpecError("iris_radius must be positive");
  if (spec.eyelid_coverage < 0 || spec.eyelid_coverage > 0.4)
    throw SpecError("eyelid_coverage must lie in [0, 0.4]");
  if (spec.highlight_count < 0) throw SpecError("highlight_count negative");
  if (spec.blur_sigma < 0) throw SpecError("blur_sigma negative");
  if (spec.canvas_width <= 0 || spec.canvas_height <= 0)
    throw SpecError("canvas dimensions must be positive");
  double margin = std::min(spec.canvas_width, spec.canvas_height) / 2.0 -
                  spec.iris_radius;
  if (margin < 10.0)
    throw SpecError("iris must fit inside the canvas with a 10 px margin");
}

/// Renders one eye. The iris texture is identity-seeded; rotation/dilation
/// jitter, defocus, highlights and sensor noise derive from the session seed.
inline std::pair<GrayImage, EyeAnnotation> render_eye(
    const EyeSpec& spec, const SynthConfig& cfg = SynthConfig{}) {
  validate_spec(spec);
  const int w = spec.canvas_width, h = spec.canvas_height;
  constexpr double kTwoPi = 6.283185307179586476925287;

  // Session draws, in a fixed order.
  Rng session(mix_seed(spec.session_seed, 0x5e5510ull));
  const double rot = session.uniform(-cfg.rotation_jitter_deg,
                                     cfg.rotation_jitter_deg) *
                     (kTwoPi / 360.0);
  const double ratio_eff =
      std::clamp(spec.pupil_to_iris_ratio +
                     session.uniform(-cfg.ratio_jitter, cfg.ratio_jitter),
                 0.15, 0.64);
  const double session_blur =
      session.uniform(cfg.session_blur_min, cfg.session_blur_max);
  const std::uint64_t noise_seed = session.next_u64();

  const Point c = image_center(w, h);
  const double r_i = spec.iris_radius;
  const double r_p = ratio_eff * r_i;

  std::vector<detail::Highlight> highlights;
  for (int i = 0; i < spec.highlight_count; ++i) {
    double ang = session.uniform(0.0, kTwoPi);
    bool in_pupil = i < (spec.highlight_count + 1) / 2;
    double rad = in_pupil
                     ? session.uniform(0.2, 0.7) * r_p
                     : r_p + session.uniform(0.3, 0.8) * (r_i - r_p);
    double hr = session.uniform(2.0, 5.0);
    highlights.push_back(
        {c.x + rad * std::cos(ang), c.y + rad * std::sin(ang), hr});
  }

  const double top_y = c.y - (1.0 - spec.eyelid_coverage) * r_i;
  const double bot_y = c.y + (1.0 - spec.eyelid_coverage) * r_i;
  const double pupil_level =
      spec.polarity == Polarity::bright_pupil ? cfg.pupil_bright : cfg.pupil_dark;

  detail::IrisTexture texture(spec.identity_seed);
  FloatImage canvas(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = (y > top_y && y < bot_y) ? cfg.sclera_level : cfg.skin_level;
      double dx = x - c.x, dy = y - c.y;
      double d = std::hypot(dx, dy);
      if (d < r_i + cfg.limbus_blend_px) {
        double t = (d - r_p) / (r_i - r_p);
        double theta = std::atan2(dy, dx);
        double tex = cfg.iris_base + cfg.iris_amp * texture.sample(t, theta - rot);
        // Soft limbus: iris inside, base outside.
        double wlim = std::clamp(
            (d - (r_i - cfg.limbus_blend_px)) / (2.0 * cfg.limbus_blend_px),
            0.0, 1.0);
        v = tex * (1.0 - wlim) + v * wlim;
        // Crisp pupil boundary (1 px blend).
        double wpup = std::clamp((d - (r_p - 1.0)) / 2.0, 0.0, 1.0);
        v = pupil_level * (1.0 - wpup) + v * wpup;
      }
      for (const auto& hl : highlights) {
        double hd = std::hypot(x - hl.x, y - hl.y);
        double whl = std::clamp(hl.r + 1.0 - hd, 0.0, 1.0);
        v = 255.0 * whl + v * (1.0 - whl);
      }
      canvas.at(x, y) = v;
    }
  }

  double blur = std::hypot(spec.blur_sigma, session_blur);
  if (blur > 0.0) canvas = gaussian_blur(canvas, blur);

  GrayImage img(w, h);
  Rng noise(noise_seed);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = canvas.at(x, y) + cfg.noise_sigma * noise.gaussian();
      img.at(x, y) = static_cast<std::uint8_t>(
          std::clamp(std::lround(v), 0l, 255l));
    }
  }

  EyeAnnotation ann;
  ann.pupil = {c.x, c.y, r_p};
  ann.iris = {c.x, c.y, r_i};
  ann.occlusion = MaskImage(w, h, 0);
  for (int y = 0; y < h; ++y) {
    if (y <= top_y + 1.0 || y >= bot_y - 1.0) continue;
    for (int x = 0; x < w; ++x) {
      double d = std::hypot(x - c.x, y - c.y);
      if (d < r_p + 0.5 || d > r_i - 0.5) continue;
      bool occluded = false;
      for (const auto& hl : highlights) {
        if (std::hypot(x - hl.x, y - hl.y) <= hl.r + 2.0) {
          occluded = true;
          break;
        }
      }
      if (!occluded) ann.occlusion.at(x, y) = 1;
    }
  }
  return {std::move(img), std::move(ann)};
}

/// Infant-style augmentation: repaints the pupil interior with independent
/// uniform draws from [lo, hi], then rotates image and annotation together by
/// a uniform angle in [-max_rot, max_rot]. Fully determined by rng_seed.
inline std::pair<GrayImage, EyeAnnotation> augment_infant(
    const GrayImage& img, const EyeAnnotation& ann, std::uint64_t rng_seed,
    int lo = 109, int hi = 190, double max_rot = 15.0) {
  if (lo > hi || lo < 0 || hi > 255)
    throw SpecError("pupil intensity range must satisfy 0 <= lo <= hi <= 255");
  Rng rng(mix_seed(rng_seed, 0xa6ull));
  GrayImage filled = img;
  const Circle& p = ann.pupil;
  int x0 = std::max(0, static_cast<int>(std::floor(p.cx - p.r)));
  int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(p.cx + p.r)));
  int y0 = std::max(0, static_cast<int>(std::floor(p.cy - p.r)));
  int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(p.cy + p.r)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double dx = x - p.cx, dy = y - p.cy;
      if (dx * dx + dy * dy < p.r * p.r)
        filled.at(x, y) =
            static_cast<std::uint8_t>(rng.uniform_int(lo, hi));
    }
  }
  double theta = rng.uniform(-max_rot, max_rot);

  EyeAnnotation out_ann;
  Point center = image_center(img.width, img.height);
  Point pc = rotate_point({ann.pupil.cx, ann.pupil.cy}, center, theta);
  Point ic = rotate_point({ann.iris.cx, ann.iris.cy}, center, theta);
  out_ann.pupil = {pc.x, pc.y, ann.pupil.r};
  out_ann.iris = {ic.x, ic.y, ann.iris.r};
  out_ann.occlusion = rotate_mask(ann.occlusion, theta);
  return {rotate(filled, theta), std::move(out_ann)};
}

}  // namespace iris
