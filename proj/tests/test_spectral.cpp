#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "vibtrack/errors.hpp"
#include "vibtrack/spectral.hpp"

using namespace vibtrack;

namespace {

// Brute-force reference: windowed, mean-removed single-bin DFT.
double brute_bin_magnitude(const std::vector<double>& x, int k, bool dc_removal) {
  const int l = static_cast<int>(x.size());
  double mean = 0.0;
  if (dc_removal) {
    for (double v : x) mean += v;
    mean /= l;
  }
  std::complex<double> acc{0.0, 0.0};
  for (int n = 0; n < l; ++n) {
    const double w = -2.0 * std::numbers::pi * k * n / l;
    acc += (x[n] - mean) * std::complex<double>(std::cos(w), std::sin(w));
  }
  return std::abs(acc);
}

std::vector<double> tone(double freq, double fs, int n, double phase = 0.0) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i)
    x[i] = std::cos(2.0 * std::numbers::pi * freq * i / fs + phase);
  return x;
}

std::vector<GridD> random_frames(int n, int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GridD> frames;
  frames.reserve(n);
  for (int i = 0; i < n; ++i) {
    GridD g(rows, cols);
    for (auto& v : g.data) v = u(rng);
    frames.push_back(std::move(g));
  }
  return frames;
}

}  // namespace

TEST_CASE("band bins at the default config are 2 and 3") {
  SpectralConfig cfg;
  const auto bins = band_bins(cfg);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].first == 2);
  CHECK(bins[0].second == doctest::Approx(2.0));
  CHECK(bins[1].first == 3);
  CHECK(bins[1].second == doctest::Approx(3.0));
}

TEST_CASE("exact-bin cosine gives L/2 at its bin and ~0 elsewhere") {
  const auto x = tone(2.0, 30.0, 30);
  CHECK(dft_bin_magnitude(x, 2) == doctest::Approx(15.0).epsilon(1e-9));
  for (int k = 1; k <= 15; ++k) {
    if (k == 2) continue;
    CHECK(dft_bin_magnitude(x, k) < 1e-9);
  }
}

TEST_CASE("constant series with dc removal is zero at all bins") {
  std::vector<double> x(30, 0.73);
  for (int k = 1; k <= 15; ++k) CHECK(dft_bin_magnitude(x, k) < 1e-12);
}

TEST_CASE("half-bin tone splits between bins 2 and 3") {
  // A 2.5 Hz tone at fs=30, L=30 sits exactly between bins 2 and 3. For a
  // real cosine the negative-frequency image skews the split slightly, so
  // the two magnitudes are comparable (within ~20%) and each dominates every
  // other bin; exact 1e-9 symmetry holds only for a complex exponential.
  const auto x = tone(2.5, 30.0, 30);
  const double m2 = dft_bin_magnitude(x, 2);
  const double m3 = dft_bin_magnitude(x, 3);
  CHECK(m2 > 1.0);
  CHECK(m3 > 1.0);
  CHECK(std::fabs(m2 - m3) / std::max(m2, m3) < 0.2);
  for (int k = 1; k <= 15; ++k) {
    if (k == 2 || k == 3) continue;
    CHECK(dft_bin_magnitude(x, k) < std::min(m2, m3));
  }
  // Against the brute-force oracle both bins agree to 1e-9.
  CHECK(std::fabs(m2 - brute_bin_magnitude(x, 2, true)) < 1e-9);
  CHECK(std::fabs(m3 - brute_bin_magnitude(x, 3, true)) < 1e-9);
}

TEST_CASE("Goertzel equals brute-force DFT on 1000 random series") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> ulen(8, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    const int l = ulen(rng);
    std::vector<double> x(l);
    for (auto& v : x) v = u(rng);
    std::uniform_int_distribution<int> ubin(1, l / 2);
    const int k = ubin(rng);
    const bool dc = trial % 2 == 0;
    const double got = dft_bin_magnitude(x, k, Window::Rect, dc);
    const double want = brute_bin_magnitude(x, k, dc);
    CHECK(std::fabs(got - want) < 1e-9 * std::max(1.0, want));
  }
}

TEST_CASE("bin index outside [0, L) throws") {
  std::vector<double> x(30, 0.0);
  CHECK_THROWS_AS(dft_bin_magnitude(x, 30), BinOutOfRange);
  CHECK_THROWS_AS(dft_bin_magnitude(x, -1), BinOutOfRange);
}

TEST_CASE("band map is linear in the input amplitude") {
  auto frames = random_frames(30, 4, 4, 11);
  SpectralConfig cfg;
  const FeatureMap base = band_energy_map_grids(frames, cfg);
  for (auto& f : frames)
    for (auto& v : f.data) v *= 3.0;
  const FeatureMap scaled = band_energy_map_grids(frames, cfg);
  for (std::size_t i = 0; i < base.data.size(); ++i)
    CHECK(scaled.data[i] == doctest::Approx(3.0 * base.data[i]).epsilon(1e-9));
}

TEST_CASE("band map is translation-equivariant") {
  // Shifting the image content by one column shifts the features with it.
  auto frames = random_frames(30, 6, 8, 13);
  std::vector<GridD> shifted;
  for (const auto& f : frames) {
    GridD g(f.rows, f.cols);
    for (int r = 0; r < f.rows; ++r)
      for (int c = 1; c < f.cols; ++c) g.at(r, c) = f.at(r, c - 1);
    shifted.push_back(std::move(g));
  }
  SpectralConfig cfg;
  const FeatureMap a = band_energy_map_grids(frames, cfg);
  const FeatureMap b = band_energy_map_grids(shifted, cfg);
  for (int r = 0; r < a.rows; ++r)
    for (int c = 1; c < a.cols; ++c)
      for (int band = 0; band < a.bands; ++band)
        CHECK(b.at(r, c, band) ==
              doctest::Approx(a.at(r, c - 1, band)).epsilon(1e-12));
}

TEST_CASE("window length mismatch throws") {
  auto frames = random_frames(29, 2, 2, 3);
  SpectralConfig cfg;
  CHECK_THROWS_AS(band_energy_map_grids(frames, cfg), WindowLengthMismatch);
}

TEST_CASE("stft: pure 2.5 Hz tone peaks in bins 2 or 3 in every column") {
  const auto x = tone(2.5, 30.0, 120);
  const GridD spec = stft_spectrogram(x, 30, 5);
  CHECK(spec.rows == 16);
  CHECK(spec.cols == (120 - 30) / 5 + 1);
  for (int c = 0; c < spec.cols; ++c) {
    int best = 0;
    for (int r = 1; r < spec.rows; ++r)
      if (spec.at(r, c) > spec.at(best, c)) best = r;
    CHECK((best == 2 || best == 3));
  }
}

TEST_CASE("stft: zero signal gives an all-zero grid; T=30 gives one column") {
  std::vector<double> x(90, 0.0);
  const GridD spec = stft_spectrogram(x, 30, 5);
  for (double v : spec.data) CHECK(v == 0.0);
  std::vector<double> y(30, 1.0);
  CHECK(stft_spectrogram(y, 30, 5).cols == 1);
}

TEST_CASE("sliding DFT matches batch after fresh pushes") {
  auto frames = random_frames(60, 5, 5, 21);
  SpectralConfig cfg;
  std::span<const GridD> init(frames.data(), 30);
  SlidingDft sdft(init, cfg);
  for (int i = 30; i < 60; ++i) sdft.push(frames[i]);
  std::span<const GridD> last(frames.data() + 30, 30);
  const FeatureMap batch = band_energy_map_grids(last, cfg);
  const FeatureMap stream = sdft.current_map();
  for (std::size_t i = 0; i < batch.data.size(); ++i)
    CHECK(std::fabs(stream.data[i] - batch.data[i]) < 1e-9);
}

TEST_CASE("sliding DFT of a constant window is zero") {
  GridD frame(3, 3, 0.42);
  std::vector<GridD> init(30, frame);
  SpectralConfig cfg;
  SlidingDft sdft(init, cfg);
  for (int i = 0; i < 30; ++i) sdft.push(frame);
  const FeatureMap map = sdft.current_map();
  for (double v : map.data) CHECK(std::fabs(v) < 1e-9);
}

TEST_CASE("sliding DFT drift over 10000 pushes stays under 1e-6") {
  SpectralConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int rows = 3, cols = 3;
  auto make_frame = [&] {
    GridD g(rows, cols);
    for (auto& v : g.data) v = u(rng);
    return g;
  };
  std::vector<GridD> window;
  for (int i = 0; i < 30; ++i) window.push_back(make_frame());
  SlidingDft sdft(window, cfg, 256);
  for (int i = 0; i < 10000; ++i) {
    GridD f = make_frame();
    window.erase(window.begin());
    window.push_back(f);
    sdft.push(f);
  }
  const FeatureMap batch = band_energy_map_grids(window, cfg);
  const FeatureMap stream = sdft.current_map();
  double worst = 0.0;
  for (std::size_t i = 0; i < batch.data.size(); ++i)
    worst = std::max(worst, std::fabs(stream.data[i] - batch.data[i]));
  CHECK(worst < 1e-6);
}

TEST_CASE("uninitialized sliding DFT refuses to push") {
  SlidingDft sdft;
  GridD f(2, 2);
  CHECK_THROWS_AS(sdft.push(f), Uninitialized);
  CHECK_THROWS_AS(sdft.current_map(), Uninitialized);
}

TEST_CASE("sliding DFT rejects non-rectangular windows") {
  auto frames = random_frames(30, 2, 2, 9);
  SpectralConfig cfg;
  cfg.window = Window::Hann;
  CHECK_THROWS_AS(SlidingDft(frames, cfg), InvalidWindowing);
}
