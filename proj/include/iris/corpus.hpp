#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iris/image_io.hpp"
#include "iris/synth.hpp"

namespace iris {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ----------------------------------------------------------------------------
// Manifest records. Paths are stored relative to the manifest file.
// ----------------------------------------------------------------------------

struct CorpusEntry {
  std::string sample_id;
  std::string subject_id;
  std::string eye_label;  // "left" | "right"
  std::string image_path;
  std::string annotation_path;
  EyeSpec spec;
  std::optional<json> quality;       // filled by the quality pass
  std::string status = "ok";         // "ok" | "failed"
  std::string status_reason;
};

struct CorpusManifest {
  std::vector<CorpusEntry> entries;
  fs::path base_dir;  // directory the manifest was loaded from / written to
};

// ----------------------------------------------------------------------------
// JSON serialization
// ----------------------------------------------------------------------------

inline json spec_to_json(const EyeSpec& s) {
  return json{{"identity_seed", s.identity_seed},
              {"session_seed", s.session_seed},
              {"polarity", to_string(s.polarity)},
              {"iris_radius", s.iris_radius},
              {"pupil_to_iris_ratio", s.pupil_to_iris_ratio},
              {"eyelid_coverage", s.eyelid_coverage},
              {"highlight_count", s.highlight_count},
              {"blur_sigma", s.blur_sigma},
              {"canvas_width", s.canvas_width},
              {"canvas_height", s.canvas_height}};
}

inline EyeSpec spec_from_json(const json& j) {
  EyeSpec s;
  s.identity_seed = j.at("identity_seed").get<std::uint64_t>();
  s.session_seed = j.at("session_seed").get<std::uint64_t>();
  s.polarity = polarity_from_string(j.at("polarity").get<std::string>());
  s.iris_radius = j.at("iris_radius").get<double>();
  s.pupil_to_iris_ratio = j.at("pupil_to_iris_ratio").get<double>();
  s.eyelid_coverage = j.at("eyelid_coverage").get<double>();
  s.highlight_count = j.at("highlight_count").get<int>();
  s.blur_sigma = j.at("blur_sigma").get<double>();
  s.canvas_width = j.at("canvas_width").get<int>();
  s.canvas_height = j.at("canvas_height").get<int>();
  return s;
}

inline json manifest_to_json(const CorpusManifest& m,
                             const json* config_echo = nullptr) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json je{{"sample_id", e.sample_id},
            {"subject_id", e.subject_id},
            {"eye_label", e.eye_label},
            {"image_path", e.image_path},
            {"annotation_path", e.annotation_path},
            {"spec", spec_to_json(e.spec)},
            {"status", e.status}};
    if (e.quality) je["quality"] = *e.quality;
    if (!e.status_reason.empty()) je["status_reason"] = e.status_reason;
    entries.push_back(std::move(je));
  }
  json out{{"version", 1}, {"entries", std::move(entries)}};
  if (config_echo) out["config"] = *config_echo;
  return out;
}

inline CorpusManifest manifest_from_json(const json& j, const fs::path& base) {
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw FormatError("manifest version: expected 1");
  CorpusManifest m;
  m.base_dir = base;
  for (const auto& je : j.at("entries")) {
    CorpusEntry e;
    e.sample_id = je.at("sample_id").get<std::string>();
    e.subject_id = je.at("subject_id").get<std::string>();
    e.eye_label = je.at("eye_label").get<std::string>();
    e.image_path = je.at("image_path").get<std::string>();
    e.annotation_path = je.at("annotation_path").get<std::string>();
    e.spec = spec_from_json(je.at("spec"));
    if (je.contains("quality")) e.quality = je.at("quality");
    if (je.contains("status")) e.status = je.at("status").get<std::string>();
    if (je.contains("status_reason"))
      e.status_reason = je.at("status_reason").get<std::string>();
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write to " + path.string());
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("JSON parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

inline void save_manifest(const CorpusManifest& m, const fs::path& path,
                          const json* config_echo = nullptr) {
  write_json_file(manifest_to_json(m, config_echo), path);
}

inline CorpusManifest load_manifest(const fs::path& path) {
  return manifest_from_json(read_json_file(path), path.parent_path());
}

// ----------------------------------------------------------------------------
// Annotation files (shared schema with segmentation output)
// ----------------------------------------------------------------------------

inline void save_annotation(const EyeAnnotation& ann, const fs::path& json_path,
                            const std::string& mask_rel_path,
                            std::optional<double> confidence = std::nullopt) {
  save_mask(ann.occlusion, json_path.parent_path() / mask_rel_path);
  json j{{"pupil", {ann.pupil.cx, ann.pupil.cy, ann.pupil.r}},
         {"iris", {ann.iris.cx, ann.iris.cy, ann.iris.r}},
         {"occlusion_path", mask_rel_path}};
  if (confidence) j["confidence"] = *confidence;
  write_json_file(j, json_path);
}

inline EyeAnnotation load_annotation(const fs::path& json_path) {
  json j = read_json_file(json_path);
  EyeAnnotation ann;
  auto read_circle = [&](const char* key) {
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3)
      throw FormatError(std::string(key) + ": expected [cx, cy, r]");
    return Circle{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
  };
  ann.pupil = read_circle("pupil");
  ann.iris = read_circle("iris");
  fs::path mask_path =
      json_path.parent_path() / j.at("occlusion_path").get<std::string>();
  ann.occlusion = load_mask(mask_path);
  return ann;
}

// ----------------------------------------------------------------------------
// Corpus generation
// ----------------------------------------------------------------------------

struct CorpusConfig {
  int n_subjects = 17;
  int samples_per_subject = 10;
  Polarity polarity = Polarity::bright_pupil;
  std::uint64_t base_seed = 1;
  fs::path output_dir;

  // Identity parameter ranges. Bright-pupil subjects get the dilated
  // (mydriasis-style) pupil ratios; dark-pupil subjects the adult range.
  double iris_radius_min = 95.0;
  double iris_radius_max = 112.0;
  double ratio_bright_min = 0.45;
  double ratio_bright_max = 0.58;
  double ratio_dark_min = 0.28;
  double ratio_dark_max = 0.42;
  double eyelid_min = 0.05;
  double eyelid_max = 0.25;
  int highlight_min = 1;
  int highlight_max = 3;
  double blur_sigma = 0.0;  // explicit extra defocus for every sample
  int canvas_width = 640;
  int canvas_height = 480;
  SynthConfig synth;
};

inline EyeSpec make_sample_spec(const CorpusConfig& cfg, int subject,
                                int sample) {
  Rng id_rng(mix_seed(mix_seed(cfg.base_seed, 0x1Dull),
                      static_cast<std::uint64_t>(subject)));
  EyeSpec spec;
  spec.identity_seed = id_rng.next_u64();
  spec.polarity = cfg.polarity;
  spec.iris_radius = id_rng.uniform(cfg.iris_radius_min, cfg.iris_radius_max);
  spec.pupil_to_iris_ratio =
      cfg.polarity == Polarity::bright_pupil
          ? id_rng.uniform(cfg.ratio_bright_min, cfg.ratio_bright_max)
          : id_rng.uniform(cfg.ratio_dark_min, cfg.ratio_dark_max);
  spec.blur_sigma = cfg.blur_sigma;
  spec.canvas_width = cfg.canvas_width;
  spec.canvas_height = cfg.canvas_height;

  std::uint64_t sskey = mix_seed(
      mix_seed(mix_seed(cfg.base_seed, 0x5e55ull),
               static_cast<std::uint64_t>(subject)),
      static_cast<std::uint64_t>(sample));
  Rng s_rng(sskey);
  spec.session_seed = s_rng.next_u64();
  spec.eyelid_coverage = s_rng.uniform(cfg.eyelid_min, cfg.eyelid_max);
  spec.highlight_count = static_cast<int>(
      s_rng.uniform_int(cfg.highlight_min, cfg.highlight_max));
  return spec;
}

inline std::string subject_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "subj%03d", i);
  return buf;
}

inline std::string sample_name(int subject, int sample) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%03d_%03d", subject, sample);
  return buf;
}

/// Renders the full corpus to cfg.output_dir and writes manifest.json.
inline CorpusManifest generate_corpus(const CorpusConfig& cfg,
                                      const json* config_echo = nullptr) {
  if (cfg.n_subjects <= 0 || cfg.samples_per_subject <= 0)
    throw ConfigError("corpus shape must be positive");
  fs::create_directories(cfg.output_dir);
  CorpusManifest manifest;
  manifest.base_dir = cfg.output_dir;
  for (int i = 0; i < cfg.n_subjects; ++i) {
    for (int j = 0; j < cfg.samples_per_subject; ++j) {
      EyeSpec spec = make_sample_spec(cfg, i, j);
      auto [img, ann] = render_eye(spec, cfg.synth);
      CorpusEntry e;
      e.sample_id = sample_name(i, j);
      e.subject_id = subject_name(i);
      e.eye_label = (i % 2 == 0) ? "left" : "right";
      e.image_path = e.sample_id + "_img.pgm";
      e.annotation_path = e.sample_id + "_ann.json";
      e.spec = spec;
      try {
        save_image(img, cfg.output_dir / e.image_path);
        save_annotation(ann, cfg.output_dir / e.annotation_path,
                        e.sample_id + "_mask.pgm");
      } catch (const Error& err) {
        throw IoError("while writing sample " + e.sample_id + ": " +
                      err.what());
      }
      manifest.entries.push_back(std::move(e));
    }
  }
  save_manifest(manifest, cfg.output_dir / "manifest.json", config_echo);
  return manifest;
}

}  // namespace iris
