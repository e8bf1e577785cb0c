#include "vibtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "vibtrack/errors.hpp"
#include "vibtrack/raster.hpp"

namespace vibtrack {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDeg2Rad = std::numbers::pi / 180.0;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Separable box blur, radius >= 1, replicated borders.
GridD box_blur(const GridD& in, int radius) {
  GridD tmp(in.rows, in.cols), out(in.rows, in.cols);
  const double inv = 1.0 / (2 * radius + 1);
  for (int r = 0; r < in.rows; ++r)
    for (int c = 0; c < in.cols; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d)
        s += in.at(r, std::clamp(c + d, 0, in.cols - 1));
      tmp.at(r, c) = s * inv;
    }
  for (int r = 0; r < in.rows; ++r)
    for (int c = 0; c < in.cols; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d)
        s += tmp.at(std::clamp(r + d, 0, in.rows - 1), c);
      out.at(r, c) = s * inv;
    }
  return out;
}

// Multiplicative Rayleigh speckle over a low-pass-filtered Gaussian
// background, clamped to [0,1].
GridD make_background(int rows, int cols, std::mt19937_64& rng) {
  GridD white(rows, cols);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : white.data) v = gauss(rng);
  GridD low = box_blur(box_blur(white, 3), 3);

  double mean = 0.0, sq = 0.0;
  for (double v : low.data) {
    mean += v;
    sq += v * v;
  }
  mean /= static_cast<double>(low.size());
  const double sd =
      std::sqrt(std::max(1e-12, sq / static_cast<double>(low.size()) - mean * mean));

  // Rayleigh with unit mean: sigma = sqrt(2/pi).
  const double sigma = std::sqrt(2.0 / std::numbers::pi);
  std::uniform_real_distribution<double> uni(1e-12, 1.0);
  GridD bg(rows, cols);
  for (std::size_t i = 0; i < bg.size(); ++i) {
    const double g = 0.45 + 0.12 * (low.data[i] - mean) / sd;
    const double ray = sigma * std::sqrt(-2.0 * std::log(uni(rng)));
    bg.data[i] = clamp01(std::max(0.0, g) * ray);
  }
  return bg;
}

double velocity_at(const std::vector<double>& v, int t) {
  if (v.empty()) return 0.0;
  return t < static_cast<int>(v.size()) ? v[t] : v.back();
}

}  // namespace

Spacing default_spacing(double depth_cm, int height_px, double footprint_mm,
                        int width_px) {
  if (depth_cm <= 0 || height_px <= 0 || footprint_mm <= 0 || width_px <= 0)
    throw InvalidProfile("spacing inputs must be positive");
  return {10.0 * depth_cm / height_px, footprint_mm / width_px};
}

std::vector<double> advance_retract_velocity(int n_frames, double speed_px,
                                             int advance_frames,
                                             int retract_frames) {
  std::vector<double> v;
  v.reserve(n_frames);
  while (static_cast<int>(v.size()) < n_frames) {
    for (int i = 0; i < advance_frames && static_cast<int>(v.size()) < n_frames; ++i)
      v.push_back(speed_px);
    for (int i = 0; i < retract_frames && static_cast<int>(v.size()) < n_frames; ++i)
      v.push_back(-speed_px);
  }
  return v;
}

std::pair<std::vector<Frame>, std::vector<GroundTruth>> generate_sequence(
    const InsertionProfile& profile, const VibrationSpec& vib,
    std::uint64_t noise_seed, int n_frames, double fs, const SimOptions& opts) {
  if (fs <= 2.0 * vib.f_vib)
    throw NyquistViolation("fs must exceed twice the vibration frequency");
  if (profile.shaft_angle_deg <= 0.0 || profile.shaft_angle_deg >= 90.0)
    throw InvalidProfile("shaft angle must lie in (0, 90) degrees");
  if (vib.amplitude_px < 0.0)
    throw InvalidProfile("vibration amplitude must be nonnegative");
  if (opts.width < 32 || opts.height < 32)
    throw InvalidProfile("image must be at least 32x32");

  const double theta = profile.shaft_angle_deg * kDeg2Rad;
  const PointD u{std::sin(theta), std::cos(theta)};  // insertion direction
  PointD vdir = vib.direction;
  const double vnorm = std::hypot(vdir.r, vdir.c);
  if (vnorm == 0.0) {
    vdir = {-u.c, u.r};  // perpendicular to the shaft
  } else {
    vdir = {vdir.r / vnorm, vdir.c / vnorm};
  }

  // Precompute tip trajectory and validate bounds.
  std::vector<double> length(n_frames);
  double len = profile.start_length_px;
  const double margin = profile.needle_width_px / 2.0 + 1.0;
  for (int t = 0; t < n_frames; ++t) {
    if (t > 0) len += velocity_at(profile.velocity_px, t - 1);
    if (len < 0.0) throw InvalidProfile("tip depth would become negative");
    length[t] = len;
    const PointD tip{profile.entry.r + len * u.r, profile.entry.c + len * u.c};
    if (tip.r < margin || tip.r > opts.height - 1 - margin || tip.c < margin ||
        tip.c > opts.width - 1 - margin)
      throw InvalidProfile("tip would exit the image");
  }

  std::mt19937_64 rng(noise_seed);
  const GridD bg = make_background(opts.height, opts.width, rng);
  const Spacing spacing =
      default_spacing(opts.depth_cm, opts.height, opts.footprint_mm, opts.width);

  std::normal_distribution<double> jitter(0.0, opts.jitter_std);

  std::vector<Frame> frames;
  std::vector<GroundTruth> gts;
  frames.reserve(n_frames);
  gts.reserve(n_frames);

  const double half = profile.needle_width_px / 2.0;
  for (int t = 0; t < n_frames; ++t) {
    const double disp =
        vib.amplitude_px * std::sin(kTwoPi * vib.f_vib * t / fs + vib.phase);
    const PointD d{disp * vdir.r, disp * vdir.c};
    const PointD tip{profile.entry.r + length[t] * u.r,
                     profile.entry.c + length[t] * u.c};
    const PointD a{profile.entry.r + d.r, profile.entry.c + d.c};
    const PointD b{tip.r + d.r, tip.c + d.c};

    Frame f;
    f.pixels = bg;
    f.timestamp = t / fs;
    f.spacing = spacing;

    // Render the displaced needle only within its bounding box.
    const double reach = half + 1.5;
    const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.r, b.r) - reach)));
    const int r1 = std::min(opts.height - 1,
                            static_cast<int>(std::ceil(std::max(a.r, b.r) + reach)));
    const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.c, b.c) - reach)));
    const int c1 = std::min(opts.width - 1,
                            static_cast<int>(std::ceil(std::max(a.c, b.c) + reach)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const PointD p{static_cast<double>(r), static_cast<double>(c)};
        const double cov = segment_coverage(p, a, b, profile.needle_width_px);
        if (cov <= 0.0) continue;
        // The needle region carries the speckle sampled at the displaced
        // position, so pixels modulate at f_vib even at zero contrast.
        double inner = bilinear(bg, p.r - d.r, p.c - d.c);
        double contrast = profile.needle_contrast;
        if (opts.occlusion_frac > 0.0 &&
            segment_param(p, a, b) > 1.0 - opts.occlusion_frac)
          contrast = 0.0;
        inner = clamp01(inner + contrast);
        f.pixels.at(r, c) = (1.0 - cov) * bg.at(r, c) + cov * inner;
      }

    if (opts.noise == NoiseMode::Live) {
      for (auto& v : f.pixels.data) v = clamp01(v + jitter(rng));
    }

    GroundTruth gt;
    gt.tip = tip;
    gt.angle_deg = profile.shaft_angle_deg;
    gt.mask = render_segment_mask(opts.height, opts.width, profile.entry, tip,
                                  profile.needle_width_px);
    frames.push_back(std::move(f));
    gts.push_back(std::move(gt));
  }
  return {std::move(frames), std::move(gts)};
}

}  // namespace vibtrack
