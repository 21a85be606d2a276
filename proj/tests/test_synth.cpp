#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iris/corpus.hpp"
#include "iris/synth.hpp"

using namespace iris;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("iris_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

EyeSpec base_spec(std::uint64_t id, std::uint64_t sess, Polarity pol) {
  EyeSpec s;
  s.identity_seed = id;
  s.session_seed = sess;
  s.polarity = pol;
  s.iris_radius = 104.0;
  s.pupil_to_iris_ratio = 0.52;
  s.eyelid_coverage = 0.15;
  s.highlight_count = 2;
  return s;
}

double mean_pupil(const GrayImage& img, const EyeAnnotation& ann) {
  double sum = 0;
  long n = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double d = std::hypot(x - ann.pupil.cx, y - ann.pupil.cy);
      if (d < ann.pupil.r - 1.0) {
        sum += img.at(x, y);
        ++n;
      }
    }
  return sum / n;
}

double mean_annulus(const GrayImage& img, const EyeAnnotation& ann) {
  double sum = 0;
  long n = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (ann.occlusion.at(x, y)) {
        sum += img.at(x, y);
        ++n;
      }
  return sum / n;
}

}  // namespace

TEST_CASE("bright pupil renders brighter than the iris annulus") {
  for (std::uint64_t id = 1; id <= 5; ++id) {
    auto [img, ann] = render_eye(base_spec(id, id * 31, Polarity::bright_pupil));
    REQUIRE(mean_pupil(img, ann) > mean_annulus(img, ann));
  }
}

TEST_CASE("dark pupil renders darker than the iris annulus") {
  auto [img, ann] = render_eye(base_spec(9, 77, Polarity::dark_pupil));
  REQUIRE(mean_pupil(img, ann) < mean_annulus(img, ann));
}

TEST_CASE("identical specs render bit-identical images") {
  EyeSpec s = base_spec(123, 456, Polarity::bright_pupil);
  auto [a, ann_a] = render_eye(s);
  auto [b, ann_b] = render_eye(s);
  REQUIRE(a.pixels == b.pixels);
  REQUIRE(ann_a.occlusion.bits == ann_b.occlusion.bits);
}

TEST_CASE("different identities render different images") {
  auto [a, ann_a] = render_eye(base_spec(1, 5, Polarity::bright_pupil));
  auto [b, ann_b] = render_eye(base_spec(2, 5, Polarity::bright_pupil));
  REQUIRE(a.pixels != b.pixels);
}

TEST_CASE("annotation: pupil strictly inside iris, mask inside annulus") {
  auto [img, ann] = render_eye(base_spec(3, 8, Polarity::bright_pupil));
  double cdist = std::hypot(ann.pupil.cx - ann.iris.cx, ann.pupil.cy - ann.iris.cy);
  REQUIRE(cdist + ann.pupil.r < ann.iris.r);
  for (int y = 0; y < ann.occlusion.height; ++y)
    for (int x = 0; x < ann.occlusion.width; ++x) {
      if (!ann.occlusion.at(x, y)) continue;
      double dp = std::hypot(x - ann.pupil.cx, y - ann.pupil.cy);
      double di = std::hypot(x - ann.iris.cx, y - ann.iris.cy);
      REQUIRE(dp >= ann.pupil.r);
      REQUIRE(di <= ann.iris.r);
    }
}

TEST_CASE("spec violations are rejected") {
  EyeSpec s = base_spec(1, 1, Polarity::bright_pupil);
  s.pupil_to_iris_ratio = 0.95;
  REQUIRE_THROWS_AS(render_eye(s), SpecError);
  s = base_spec(1, 1, Polarity::bright_pupil);
  s.iris_radius = 300.0;  // violates the 10 px canvas margin
  REQUIRE_THROWS_AS(render_eye(s), SpecError);
  s = base_spec(1, 1, Polarity::bright_pupil);
  s.eyelid_coverage = 0.7;
  REQUIRE_THROWS_AS(render_eye(s), SpecError);
}

TEST_CASE("augment replaces pupil interior with draws from [109, 190]") {
  auto [img, ann] = render_eye(base_spec(4, 2, Polarity::dark_pupil));
  auto [out, out_ann] = augment_infant(img, ann, 99);
  // Interior with margin: rotation blends values near the boundary, but
  // convex combinations of in-range values stay in range.
  int lo = 256, hi = -1;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      double d = std::hypot(x - out_ann.pupil.cx, y - out_ann.pupil.cy);
      if (d < out_ann.pupil.r - 3.0) {
        lo = std::min(lo, static_cast<int>(out.at(x, y)));
        hi = std::max(hi, static_cast<int>(out.at(x, y)));
      }
    }
  REQUIRE(lo >= 109);
  REQUIRE(hi <= 190);
}

TEST_CASE("degenerate augment: lo=hi=150 and no rotation") {
  auto [img, ann] = render_eye(base_spec(4, 2, Polarity::bright_pupil));
  auto [out, out_ann] = augment_infant(img, ann, 5, 150, 150, 0.0);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      double dx = x - ann.pupil.cx, dy = y - ann.pupil.cy;
      bool inside = dx * dx + dy * dy < ann.pupil.r * ann.pupil.r;
      if (inside)
        REQUIRE(static_cast<int>(out.at(x, y)) == 150);
      else
        REQUIRE(out.at(x, y) == img.at(x, y));
    }
}

TEST_CASE("augment rotation is recoverable from annotations and within the cap") {
  // Off-center circles so the rotation about the image center moves them.
  GrayImage img(320, 240, 120);
  EyeAnnotation ann;
  ann.pupil = {110.0, 80.0, 20.0};
  ann.iris = {110.0, 80.0, 55.0};
  ann.occlusion = MaskImage(320, 240, 0);
  Point c = image_center(img.width, img.height);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto [out, out_ann] = augment_infant(img, ann, seed, 109, 190, 15.0);
    double a0 = std::atan2(ann.pupil.cy - c.y, ann.pupil.cx - c.x);
    double a1 = std::atan2(out_ann.pupil.cy - c.y, out_ann.pupil.cx - c.x);
    double rec = (a1 - a0) * 180.0 / M_PI;
    while (rec > 180.0) rec -= 360.0;
    while (rec < -180.0) rec += 360.0;
    REQUIRE(std::abs(rec) <= 15.0 + 1e-6);
    // Radii are preserved and the pupil stays strictly inside the iris.
    REQUIRE(out_ann.pupil.r == ann.pupil.r);
    double cdist = std::hypot(out_ann.pupil.cx - out_ann.iris.cx,
                              out_ann.pupil.cy - out_ann.iris.cy);
    REQUIRE(cdist + out_ann.pupil.r < out_ann.iris.r);
  }
}

TEST_CASE("augment rejects a bad intensity range") {
  auto [img, ann] = render_eye(base_spec(4, 2, Polarity::bright_pupil));
  REQUIRE_THROWS_AS(augment_infant(img, ann, 1, 200, 100), SpecError);
}

TEST_CASE("single-entry corpus round-trips through JSON") {
  CorpusConfig cfg;
  cfg.n_subjects = 1;
  cfg.samples_per_subject = 1;
  cfg.base_seed = 7;
  cfg.canvas_width = 256;
  cfg.canvas_height = 192;
  cfg.iris_radius_min = 50;
  cfg.iris_radius_max = 60;
  cfg.output_dir = fresh_dir("corpus_single");
  CorpusManifest m = generate_corpus(cfg);
  REQUIRE(m.entries.size() == 1);
  CorpusManifest loaded = load_manifest(cfg.output_dir / "manifest.json");
  REQUIRE(loaded.entries.size() == 1);
  const auto& e = loaded.entries[0];
  REQUIRE(e.sample_id == m.entries[0].sample_id);
  REQUIRE(e.subject_id == m.entries[0].subject_id);
  REQUIRE(e.spec.identity_seed == m.entries[0].spec.identity_seed);
  REQUIRE(fs::exists(cfg.output_dir / e.image_path));
  REQUIRE(fs::exists(cfg.output_dir / e.annotation_path));
  // Annotation loads and matches the rendered geometry.
  EyeAnnotation ann = load_annotation(cfg.output_dir / e.annotation_path);
  REQUIRE(ann.pupil.r < ann.iris.r);
}

TEST_CASE("corpus generation is deterministic across runs") {
  CorpusConfig cfg;
  cfg.n_subjects = 2;
  cfg.samples_per_subject = 2;
  cfg.base_seed = 2024;
  cfg.canvas_width = 256;
  cfg.canvas_height = 192;
  cfg.iris_radius_min = 50;
  cfg.iris_radius_max = 60;
  cfg.output_dir = fresh_dir("corpus_det_a");
  generate_corpus(cfg);
  fs::path dir_a = cfg.output_dir;
  cfg.output_dir = fresh_dir("corpus_det_b");
  generate_corpus(cfg);

  auto read_bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    fs::path other = cfg.output_dir / entry.path().filename();
    REQUIRE(fs::exists(other));
    REQUIRE(read_bytes(entry.path()) == read_bytes(other));
  }
}

TEST_CASE("paper-scale corpus shape: 17 subjects at 112 samples") {
  CorpusConfig cfg;
  cfg.n_subjects = 17;
  cfg.samples_per_subject = 112;
  cfg.base_seed = 5;
  cfg.canvas_width = 160;
  cfg.canvas_height = 120;
  cfg.iris_radius_min = 34;
  cfg.iris_radius_max = 40;
  cfg.output_dir = fresh_dir("corpus_paper_scale");
  CorpusManifest m = generate_corpus(cfg);
  REQUIRE(m.entries.size() == 17u * 112u);
  // Unique sample ids, subjects share identity seeds, sessions differ.
  std::set<std::string> ids;
  std::map<std::string, std::set<std::uint64_t>> id_seeds;
  std::set<std::uint64_t> session_seeds;
  for (const auto& e : m.entries) {
    ids.insert(e.sample_id);
    id_seeds[e.subject_id].insert(e.spec.identity_seed);
    session_seeds.insert(e.spec.session_seed);
  }
  REQUIRE(ids.size() == m.entries.size());
  REQUIRE(id_seeds.size() == 17);
  for (const auto& [subj, seeds] : id_seeds) REQUIRE(seeds.size() == 1);
  REQUIRE(session_seeds.size() == m.entries.size());
  fs::remove_all(cfg.output_dir);
}
