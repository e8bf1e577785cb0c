#include "vibtrack/spectral.hpp"

#include <cmath>
#include <numbers>

#include "vibtrack/errors.hpp"

namespace vibtrack {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> window_weights(int n, Window w) {
  std::vector<double> out(n, 1.0);
  if (w == Window::Hann) {
    for (int i = 0; i < n; ++i)
      out[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / (n - 1));
  }
  return out;
}

}  // namespace

std::vector<std::pair<int, double>> band_bins(const SpectralConfig& cfg) {
  if (cfg.band_lo <= 0.0 || cfg.band_hi > cfg.fs / 2.0 ||
      cfg.band_lo > cfg.band_hi)
    throw InvalidWindowing("target band must lie within (0, fs/2]");
  std::vector<std::pair<int, double>> bins;
  for (int k = 1; k <= cfg.window_len / 2; ++k) {
    double hz = k * cfg.fs / cfg.window_len;
    if (hz >= cfg.band_lo && hz <= cfg.band_hi) bins.emplace_back(k, hz);
  }
  return bins;
}

double dft_bin_magnitude(std::span<const double> x, int k, Window window,
                         bool dc_removal) {
  const int n = static_cast<int>(x.size());
  if (k < 0 || k >= n) throw BinOutOfRange("bin index outside [0, L)");

  double mean = 0.0;
  if (dc_removal) {
    for (double v : x) mean += v;
    mean /= n;
  }
  const auto w = window_weights(n, window);

  // Goertzel recurrence on the windowed, mean-subtracted series.
  const double omega = kTwoPi * k / n;
  const double coeff = 2.0 * std::cos(omega);
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s0 = w[i] * (x[i] - mean) + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  // X = s1 - e^{-j*omega} * s2
  const double re = s1 - s2 * std::cos(omega);
  const double im = s2 * std::sin(omega);
  return std::hypot(re, im);
}

FeatureMap band_energy_map_grids(std::span<const GridD> window,
                                 const SpectralConfig& cfg) {
  if (static_cast<int>(window.size()) != cfg.window_len)
    throw WindowLengthMismatch("window frame count != configured L");
  const int L = cfg.window_len;
  const int rows = window[0].rows, cols = window[0].cols;
  for (const auto& g : window)
    if (g.rows != rows || g.cols != cols)
      throw ShapeMismatch("frames in window differ in shape");

  const auto bins = band_bins(cfg);
  const int nb = static_cast<int>(bins.size());
  FeatureMap map(rows, cols, nb);
  map.window_len = L;
  map.band_bins = bins;
  if (nb == 0) return map;

  const std::size_t npix = static_cast<std::size_t>(rows) * cols;
  const auto w = window_weights(L, cfg.window);

  std::vector<double> mean;
  if (cfg.dc_removal) {
    mean.assign(npix, 0.0);
    for (int n = 0; n < L; ++n) {
      const double* src = window[n].data.data();
      for (std::size_t p = 0; p < npix; ++p) mean[p] += src[p];
    }
    for (std::size_t p = 0; p < npix; ++p) mean[p] /= L;
  }

  std::vector<double> acc_re(npix), acc_im(npix);
  for (int b = 0; b < nb; ++b) {
    const int k = bins[b].first;
    std::fill(acc_re.begin(), acc_re.end(), 0.0);
    std::fill(acc_im.begin(), acc_im.end(), 0.0);
    double csum_re = 0.0, csum_im = 0.0;
    for (int n = 0; n < L; ++n) {
      const double ang = -kTwoPi * k * n / L;
      const double cr = w[n] * std::cos(ang);
      const double ci = w[n] * std::sin(ang);
      csum_re += cr;
      csum_im += ci;
      const double* src = window[n].data.data();
      for (std::size_t p = 0; p < npix; ++p) {
        acc_re[p] += cr * src[p];
        acc_im[p] += ci * src[p];
      }
    }
    if (cfg.dc_removal) {
      for (std::size_t p = 0; p < npix; ++p) {
        acc_re[p] -= mean[p] * csum_re;
        acc_im[p] -= mean[p] * csum_im;
      }
    }
    for (std::size_t p = 0; p < npix; ++p)
      map.data[p * nb + b] = std::hypot(acc_re[p], acc_im[p]);
  }
  return map;
}

FeatureMap band_energy_map(std::span<const Frame> window,
                           const SpectralConfig& cfg) {
  std::vector<GridD> grids;
  grids.reserve(window.size());
  for (const auto& f : window) grids.push_back(f.pixels);
  return band_energy_map_grids(grids, cfg);
}

GridD stft_spectrogram(std::span<const double> series, int win_len, int hop,
                       Window window) {
  const int t = static_cast<int>(series.size());
  if (win_len < 4 || t < win_len || hop < 1 || hop > win_len)
    throw InvalidWindowing("need T >= win_len >= 4 and 1 <= hop <= win_len");
  const int n_cols = (t - win_len) / hop + 1;
  const int n_bins = win_len / 2 + 1;
  GridD out(n_bins, n_cols, 0.0);
  for (int col = 0; col < n_cols; ++col) {
    auto seg = series.subspan(static_cast<std::size_t>(col) * hop, win_len);
    for (int k = 0; k < n_bins; ++k)
      out.at(k, col) = dft_bin_magnitude(seg, k, window, /*dc_removal=*/false);
  }
  return out;
}

SlidingDft::SlidingDft(std::span<const GridD> initial, const SpectralConfig& cfg,
                       int renorm_interval)
    : cfg_(cfg), renorm_interval_(renorm_interval) {
  if (cfg_.window != Window::Rect)
    throw InvalidWindowing("sliding path is rectangular-window only");
  if (static_cast<int>(initial.size()) != cfg_.window_len)
    throw WindowLengthMismatch("sliding DFT needs exactly L initial frames");
  bins_ = band_bins(cfg_);
  rows_ = initial[0].rows;
  cols_ = initial[0].cols;
  ring_.assign(initial.begin(), initial.end());
  head_ = 0;
  twiddle_.reserve(bins_.size());
  for (const auto& [k, hz] : bins_) {
    (void)hz;
    const double ang = kTwoPi * k / cfg_.window_len;
    twiddle_.emplace_back(std::cos(ang), std::sin(ang));
  }
  recompute();
  initialized_ = true;
}

void SlidingDft::recompute() {
  const int L = cfg_.window_len;
  const std::size_t npix = static_cast<std::size_t>(rows_) * cols_;
  accum_.assign(bins_.size(), std::vector<std::complex<double>>(npix));
  for (std::size_t b = 0; b < bins_.size(); ++b) {
    const int k = bins_[b].first;
    auto& acc = accum_[b];
    for (int n = 0; n < L; ++n) {
      const double ang = -kTwoPi * k * n / L;
      const std::complex<double> c(std::cos(ang), std::sin(ang));
      const double* src = ring_[(head_ + n) % L].data.data();
      for (std::size_t p = 0; p < npix; ++p) acc[p] += src[p] * c;
    }
  }
  since_renorm_ = 0;
}

void SlidingDft::push(const GridD& frame) {
  if (!initialized_) throw Uninitialized("sliding DFT state not initialized");
  if (frame.rows != rows_ || frame.cols != cols_)
    throw ShapeMismatch("pushed frame shape differs from state");
  const std::size_t npix = static_cast<std::size_t>(rows_) * cols_;
  const double* oldest = ring_[head_].data.data();
  const double* fresh = frame.data.data();
  for (std::size_t b = 0; b < bins_.size(); ++b) {
    const std::complex<double> tw = twiddle_[b];
    auto& acc = accum_[b];
    for (std::size_t p = 0; p < npix; ++p)
      acc[p] = (acc[p] + (fresh[p] - oldest[p])) * tw;
  }
  ring_[head_] = frame;
  head_ = (head_ + 1) % cfg_.window_len;
  if (++since_renorm_ >= renorm_interval_) recompute();
}

FeatureMap SlidingDft::current_map() const {
  if (!initialized_) throw Uninitialized("sliding DFT state not initialized");
  const int nb = static_cast<int>(bins_.size());
  FeatureMap map(rows_, cols_, nb);
  map.window_len = cfg_.window_len;
  map.band_bins = bins_;
  const std::size_t npix = static_cast<std::size_t>(rows_) * cols_;
  for (int b = 0; b < nb; ++b) {
    const auto& acc = accum_[b];
    for (std::size_t p = 0; p < npix; ++p)
      map.data[p * nb + b] = std::abs(acc[p]);
  }
  return map;
}

}  // namespace vibtrack
