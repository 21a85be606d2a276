#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace iris {

// ----------------------------------------------------------------------------
// Error hierarchy. Every error carries a short machine-parsable category that
// the CLI prints as "error: <category>: <message>".
// ----------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};
struct SpecError : Error {
  explicit SpecError(const std::string& m) : Error("spec", m) {}
};
struct NoBoundary : Error {
  explicit NoBoundary(const std::string& m) : Error("no_boundary", m) {}
};
struct SegmentationFailed : Error {
  explicit SegmentationFailed(const std::string& m)
      : Error("segmentation_failed", m) {}
};
struct NormalizationError : Error {
  explicit NormalizationError(const std::string& m)
      : Error("normalization", m) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};
struct ModelError : Error {
  explicit ModelError(const std::string& m) : Error("model", m) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};
struct IncompatibleCodes : Error {
  explicit IncompatibleCodes(const std::string& m)
      : Error("incompatible_codes", m) {}
};
struct QualityError : Error {
  explicit QualityError(const std::string& m) : Error("quality", m) {}
};
struct EvalError : Error {
  explicit EvalError(const std::string& m) : Error("eval", m) {}
};

// ----------------------------------------------------------------------------
// Deterministic random numbers. std::mt19937 engines are portable but the
// standard distributions are not, so all draws go through this generator.
// ----------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Mixes a stream label into a seed, for deriving independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) {
  std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ull + (label << 6) + (label >> 2));
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n), n > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // 128-bit multiply-shift reduction; bias is < 2^-64 and irrelevant here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  /// Standard normal draw. Always consumes exactly two uniforms.
  double gaussian() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t state_;
};

/// FNV-1a over raw bytes; used for parameter fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

}  // namespace iris
