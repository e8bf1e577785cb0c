#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "vibtrack/frame.hpp"
#include "vibtrack/grid.hpp"

namespace vibtrack {

enum class Window { Rect, Hann };

struct SpectralConfig {
  int window_len = 30;     // L
  double fs = 30.0;        // Hz
  double band_lo = 2.0;    // Hz, inclusive
  double band_hi = 3.0;    // Hz, inclusive
  Window window = Window::Rect;
  bool dc_removal = true;
};

// Per-pixel band magnitudes over the trailing window.
// Layout: pixel-major, data[(r*cols + c)*bands + b].
struct FeatureMap {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  int window_len = 0;
  std::vector<std::pair<int, double>> band_bins;  // (bin index, center Hz)
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int r, int c, int b)
      : rows(r), cols(c), bands(b),
        data(static_cast<std::size_t>(r) * c * b, 0.0) {}

  double& at(int r, int c, int b) {
    return data[(static_cast<std::size_t>(r) * cols + c) * bands + b];
  }
  double at(int r, int c, int b) const {
    return data[(static_cast<std::size_t>(r) * cols + c) * bands + b];
  }
  // Sum of band magnitudes at one pixel.
  double energy(int r, int c) const {
    double s = 0.0;
    for (int b = 0; b < bands; ++b) s += at(r, c, b);
    return s;
  }
};

// Bins k in [1, L/2] whose center frequency k*fs/L lies in [band_lo, band_hi].
std::vector<std::pair<int, double>> band_bins(const SpectralConfig& cfg);

// |sum_n w[n]*(x[n]-mean)*exp(-j*2*pi*k*n/L)| via the Goertzel recurrence.
double dft_bin_magnitude(std::span<const double> x, int k,
                         Window window = Window::Rect, bool dc_removal = true);

// Batch band magnitudes for every pixel of an L-frame window.
FeatureMap band_energy_map(std::span<const Frame> window,
                           const SpectralConfig& cfg);
FeatureMap band_energy_map_grids(std::span<const GridD> window,
                                 const SpectralConfig& cfg);

// Magnitude STFT for diagnostics. Rows: bins 0..win_len/2; one column per hop.
GridD stft_spectrogram(std::span<const double> series, int win_len, int hop,
                       Window window = Window::Rect);

// Incremental per-pixel sliding DFT over a fixed-length frame window.
// Rectangular window only; accumulators are rebuilt from the retained frames
// every renorm_interval pushes to bound drift.
class SlidingDft {
 public:
  SlidingDft() = default;
  SlidingDft(std::span<const GridD> initial, const SpectralConfig& cfg,
             int renorm_interval = 256);

  void push(const GridD& frame);
  FeatureMap current_map() const;

  bool initialized() const { return initialized_; }
  const SpectralConfig& config() const { return cfg_; }
  int pushes_since_renorm() const { return since_renorm_; }

 private:
  void recompute();

  SpectralConfig cfg_;
  std::vector<std::pair<int, double>> bins_;
  std::vector<GridD> ring_;  // L frames, oldest at ring_[head_]
  int head_ = 0;
  int renorm_interval_ = 256;
  int since_renorm_ = 0;
  int rows_ = 0, cols_ = 0;
  // accum_[b] holds one complex value per pixel.
  std::vector<std::vector<std::complex<double>>> accum_;
  std::vector<std::complex<double>> twiddle_;  // exp(+j*2*pi*k/L) per band
  bool initialized_ = false;
};

}  // namespace vibtrack
