#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <random>

#include "vibtrack/dataio.hpp"
#include "vibtrack/errors.hpp"
#include "vibtrack/sim.hpp"
#include "vibtrack/spectral.hpp"

using namespace vibtrack;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<VideoMeta> fake_videos(int n, double angle) {
  std::vector<VideoMeta> v;
  for (int i = 0; i < n; ++i) {
    VideoMeta m;
    m.id = "vid_" + std::to_string(1000 + i);
    m.angle_deg = angle;
    m.frame_count = 100;
    m.path = m.id;
    v.push_back(std::move(m));
  }
  return v;
}

}  // namespace

TEST_CASE("split counts match the expected per-angle allocation") {
  const std::array<double, 3> f{0.8, 0.1, 0.1};
  const auto a = split_counts(50, f);
  CHECK(a[0] == 40);
  CHECK(a[1] == 5);
  CHECK(a[2] == 5);
  const auto b = split_counts(56, f);
  CHECK(b[0] == 44);
  CHECK(b[1] == 6);
  CHECK(b[2] == 6);
  const auto c = split_counts(10, f);
  CHECK(c[0] == 8);
  CHECK(c[1] == 1);
  CHECK(c[2] == 1);
}

TEST_CASE("stratified split keeps per-angle proportions and is seeded") {
  auto videos = fake_videos(50, 15.0);
  auto more = fake_videos(56, 30.0);
  for (auto& m : more) m.id = "b_" + m.id;
  videos.insert(videos.end(), more.begin(), more.end());

  const DatasetManifest m1 = split(videos, {0.8, 0.1, 0.1}, 9, true);
  int counts[2][3] = {};
  for (const auto& v : m1.videos) {
    const int ang = v.angle_deg == 15.0 ? 0 : 1;
    counts[ang][static_cast<int>(v.split)]++;
  }
  CHECK(counts[0][0] == 40);
  CHECK(counts[0][1] == 5);
  CHECK(counts[0][2] == 5);
  CHECK(counts[1][0] == 44);
  CHECK(counts[1][1] == 6);
  CHECK(counts[1][2] == 6);

  // Determinism and input-order invariance.
  auto shuffled = videos;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const DatasetManifest m2 = split(shuffled, {0.8, 0.1, 0.1}, 9, true);
  REQUIRE(m1.videos.size() == m2.videos.size());
  for (std::size_t i = 0; i < m1.videos.size(); ++i) {
    CHECK(m1.videos[i].id == m2.videos[i].id);
    CHECK(m1.videos[i].split == m2.videos[i].split);
  }

  // A different seed moves at least one video.
  const DatasetManifest m3 = split(videos, {0.8, 0.1, 0.1}, 10, true);
  bool any_diff = false;
  for (std::size_t i = 0; i < m1.videos.size(); ++i)
    if (m1.videos[i].split != m3.videos[i].split) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("too-small strata are rejected") {
  CHECK_THROWS_AS(split(fake_videos(2, 15.0), {0.8, 0.1, 0.1}, 1, true),
                  TooFewVideos);
}

TEST_CASE("sequence counting") {
  CHECK(count_sequences(30, 30) == 1);
  CHECK(count_sequences(100, 30) == 71);
  CHECK_THROWS_AS(count_sequences(29, 30), VideoTooShort);
}

TEST_CASE("PGM round-trip quantizes to 8 bits") {
  TempDir tmp("vibtrack_pgm_test");
  GridD img(5, 7);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : img.data) v = u(rng);
  const std::string p = (tmp.path / "x.pgm").string();
  write_pgm(p, img);
  const GridD back = read_pgm(p);
  REQUIRE(back.rows == 5);
  REQUIRE(back.cols == 7);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::fabs(back.data[i] - img.data[i]) <= 0.5 / 255.0 + 1e-12);
  // A second write/read is exact (already quantized).
  write_pgm(p, back);
  const GridD again = read_pgm(p);
  for (std::size_t i = 0; i < back.data.size(); ++i)
    CHECK(again.data[i] == back.data[i]);
}

TEST_CASE("packed mask round-trip is exact") {
  TempDir tmp("vibtrack_mask_test");
  Mask m(13, 17);  // deliberately not a multiple of 8
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> bit(0, 1);
  for (auto& v : m.data) v = static_cast<std::uint8_t>(bit(rng));
  const std::string p = (tmp.path / "m.bin").string();
  write_packed_mask(p, m);
  const Mask back = read_packed_mask(p);
  REQUIRE(back.rows == 13);
  REQUIRE(back.cols == 17);
  for (std::size_t i = 0; i < m.data.size(); ++i)
    CHECK(back.data[i] == m.data[i]);
  // File size: 12-byte header + ceil(bits/8).
  CHECK(fs::file_size(p) == 12 + (13 * 17 + 7) / 8);
}

TEST_CASE("video directory round-trip") {
  TempDir tmp("vibtrack_video_test");
  InsertionProfile profile;
  VibrationSpec vib;
  SimOptions opts;
  opts.width = 64;
  opts.height = 64;
  const auto [frames, gts] = generate_sequence(profile, vib, 8, 10, 30.0, opts);
  Video v;
  v.frames = frames;
  v.gt = gts;
  const std::string dir = (tmp.path / "vid").string();
  write_video(dir, v, 30.0);
  const Video back = read_video(dir);
  REQUIRE(back.frames.size() == 10);
  REQUIRE(back.gt.size() == 10);
  CHECK(read_video_angle(dir) == doctest::Approx(30.0));
  CHECK(back.frames[0].spacing.row_mm ==
        doctest::Approx(frames[0].spacing.row_mm).epsilon(1e-9));
  for (std::size_t i = 0; i < back.gt.size(); ++i) {
    CHECK(back.gt[i].tip.r == doctest::Approx(gts[i].tip.r).epsilon(1e-6));
    CHECK(back.gt[i].tip.c == doctest::Approx(gts[i].tip.c).epsilon(1e-6));
    for (std::size_t j = 0; j < gts[i].mask.data.size(); ++j)
      CHECK(back.gt[i].mask.data[j] == gts[i].mask.data[j]);
  }
}

TEST_CASE("manifest round-trip") {
  TempDir tmp("vibtrack_manifest_test");
  DatasetManifest m;
  m.fs = 30.0;
  m.spacing = {0.17578, 0.20039};
  m.window_len = 30;
  m.videos = fake_videos(5, 15.0);
  m.videos[1].split = SplitKind::Val;
  m.videos[2].split = SplitKind::Test;
  const std::string p = (tmp.path / "manifest").string();
  write_manifest(m, p);
  const DatasetManifest back = read_manifest(p);
  REQUIRE(back.videos.size() == 5);
  CHECK(back.window_len == 30);
  CHECK(back.spacing.col_mm == doctest::Approx(0.20039));
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.videos[i].id == m.videos[i].id);
    CHECK(back.videos[i].split == m.videos[i].split);
    CHECK(back.videos[i].angle_deg == doctest::Approx(m.videos[i].angle_deg));
  }
}

TEST_CASE("augmentation identities") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GridD> frames(3, GridD(6, 6));
  std::vector<Mask> masks(3, Mask(6, 6));
  for (auto& f : frames)
    for (auto& v : f.data) v = u(rng);
  for (auto& m : masks)
    for (auto& v : m.data) v = static_cast<std::uint8_t>(u(rng) > 0.7);

  SUBCASE("hflip is an involution and negates the angle") {
    auto f2 = frames;
    auto m2 = masks;
    double angle = 30.0;
    AugmentOps flip;
    flip.hflip = true;
    augment_window(f2, m2, angle, flip);
    CHECK(angle == doctest::Approx(-30.0));
    augment_window(f2, m2, angle, flip);
    CHECK(angle == doctest::Approx(30.0));
    for (std::size_t i = 0; i < frames.size(); ++i) {
      for (std::size_t j = 0; j < frames[i].data.size(); ++j)
        CHECK(f2[i].data[j] == frames[i].data[j]);
      for (std::size_t j = 0; j < masks[i].data.size(); ++j)
        CHECK(m2[i].data[j] == masks[i].data[j]);
    }
  }

  SUBCASE("identity ops leave everything unchanged") {
    auto f2 = frames;
    auto m2 = masks;
    double angle = 15.0;
    augment_window(f2, m2, angle, AugmentOps{});
    CHECK(angle == 15.0);
    for (std::size_t i = 0; i < frames.size(); ++i)
      for (std::size_t j = 0; j < frames[i].data.size(); ++j)
        CHECK(f2[i].data[j] == frames[i].data[j]);
  }

  SUBCASE("sampled parameters stay inside the configured ranges") {
    AugmentRanges ranges;
    for (int i = 0; i < 200; ++i) {
      const AugmentOps ops = sample_augment(rng, ranges);
      CHECK(ops.contrast >= ranges.contrast_lo);
      CHECK(ops.contrast <= ranges.contrast_hi);
      CHECK(ops.brightness >= ranges.brightness_lo);
      CHECK(ops.brightness <= ranges.brightness_hi);
    }
  }
}

TEST_CASE("hflip commutes with the temporal spectrum") {
  // Flipping every frame of a window mirrors the band-energy map: the DFT is
  // per-pixel in time, so spatial flips just relabel pixels.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GridD> frames(30, GridD(5, 8));
  std::vector<Mask> masks(30, Mask(5, 8));
  for (auto& f : frames)
    for (auto& v : f.data) v = u(rng);
  SpectralConfig cfg;
  const FeatureMap orig = band_energy_map_grids(frames, cfg);
  auto flipped = frames;
  double angle = 30.0;
  AugmentOps flip;
  flip.hflip = true;
  augment_window(flipped, masks, angle, flip);
  const FeatureMap mirr = band_energy_map_grids(flipped, cfg);
  for (int r = 0; r < orig.rows; ++r)
    for (int c = 0; c < orig.cols; ++c)
      for (int b = 0; b < orig.bands; ++b)
        CHECK(std::fabs(mirr.at(r, orig.cols - 1 - c, b) - orig.at(r, c, b)) <
              1e-9);
}

TEST_CASE("contrast and brightness are sequential clamped operations") {
  std::vector<GridD> frames(1, GridD(1, 3));
  frames[0].data = {0.1, 0.5, 0.95};
  std::vector<Mask> masks(1, Mask(1, 3));
  double angle = 0.0;
  AugmentOps ops;
  ops.contrast = 1.2;
  ops.brightness = 0.1;
  augment_window(frames, masks, angle, ops);
  // p <- clamp(0.5 + (p-0.5)*1.2); then clamp(p + 0.1)
  CHECK(frames[0].data[0] == doctest::Approx(0.5 - 0.4 * 1.2 + 0.1).epsilon(1e-12));
  CHECK(frames[0].data[1] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(frames[0].data[2] == doctest::Approx(1.0));  // saturates
}
