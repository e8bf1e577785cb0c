#include "vibtrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vibtrack/errors.hpp"

namespace vibtrack {

namespace {

GridD energy_sum(const FeatureMap& map) {
  GridD e(map.rows, map.cols);
  for (int r = 0; r < map.rows; ++r)
    for (int c = 0; c < map.cols; ++c) e.at(r, c) = map.energy(r, c);
  return e;
}

double robust_threshold(const GridD& energy, double floor, double mad_k) {
  std::vector<double> v(energy.data);
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double median = v[mid];
  for (auto& x : v) x = std::fabs(x - median);
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double mad = v[mid];
  return std::max(floor, median + mad_k * 1.4826 * mad);
}

}  // namespace

std::optional<Detection> detect_from_map(const FeatureMap& map,
                                         const PipelineConfig& cfg,
                                         long frame_index,
                                         BinarizeResult* mask_out) {
  BinarizeResult bin;
  if (cfg.source == DetectionSource::SpectralThreshold) {
    const GridD energy = energy_sum(map);
    const double thr =
        robust_threshold(energy, cfg.energy_floor, cfg.mad_k);
    bin = binarize(energy, thr);
  } else {
    bin = binarize(forward(map, cfg.params), cfg.detect.threshold);
  }
  if (mask_out) *mask_out = bin;
  if (static_cast<int>(bin.positives.size()) < cfg.min_positives)
    return std::nullopt;
  try {
    const LineFit fit = ransac_line(bin.positives, cfg.detect.inlier_tol,
                                    cfg.detect.iterations, cfg.detect.seed);
    Detection det = extract_tip(bin.mask, fit, cfg.spacing);
    det.frame_index = frame_index;
    return det;
  } catch (const Error&) {
    return std::nullopt;
  }
}

StreamState::StreamState(int rows, int cols, PipelineConfig cfg)
    : cfg_(std::move(cfg)), rows_(rows), cols_(cols) {
  pending_.reserve(cfg_.spectral.window_len);
}

std::optional<Detection> StreamState::push_frame(const GridD& frame) {
  if (frame.rows != rows_ || frame.cols != cols_)
    throw ShapeMismatch("frame shape differs from stream state");
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Detection> det;
  if (!sdft_) {
    pending_.push_back(frame);
    ++pushed_;
    if (static_cast<int>(pending_.size()) == cfg_.spectral.window_len) {
      sdft_.emplace(pending_, cfg_.spectral, cfg_.renorm_interval);
      pending_.clear();
      pending_.shrink_to_fit();
      det = detect_current();
    }
  } else {
    sdft_->push(frame);
    ++pushed_;
    det = detect_current();
  }
  const auto t1 = std::chrono::steady_clock::now();
  latencies_ms_.push_back(
      std::chrono::duration<double, std::milli>(t1 - t0).count());
  if (det) latest_ = det;
  return det;
}

std::optional<Detection> StreamState::detect_current() {
  return detect_from_map(sdft_->current_map(), cfg_, pushed_ - 1);
}

FeatureMap StreamState::current_map() const {
  if (!sdft_) throw Uninitialized("stream has not finished warm-up");
  return sdft_->current_map();
}

std::vector<std::optional<Detection>> process_video(const Video& video,
                                                    const PipelineConfig& cfg) {
  if (video.frames.empty()) return {};
  PipelineConfig cfg2 = cfg;
  cfg2.spacing = video.frames.front().spacing;
  StreamState state(video.frames.front().pixels.rows,
                    video.frames.front().pixels.cols, cfg2);
  std::vector<std::optional<Detection>> out;
  out.reserve(video.frames.size());
  for (const auto& f : video.frames) out.push_back(state.push_frame(f.pixels));
  return out;
}

std::vector<std::optional<Detection>> process_video_batch(
    const Video& video, const PipelineConfig& cfg) {
  std::vector<std::optional<Detection>> out;
  const int l = cfg.spectral.window_len;
  const int t = static_cast<int>(video.frames.size());
  PipelineConfig cfg2 = cfg;
  if (t > 0) cfg2.spacing = video.frames.front().spacing;
  for (int end = 0; end < t; ++end) {
    if (end < l - 1) {
      out.push_back(std::nullopt);
      continue;
    }
    std::span<const Frame> window(&video.frames[end - l + 1],
                                  static_cast<std::size_t>(l));
    const FeatureMap map = band_energy_map(window, cfg2.spectral);
    out.push_back(detect_from_map(map, cfg2, end));
  }
  return out;
}

LatencyReport benchmark(const PipelineConfig& cfg, std::span<const GridD> frames,
                        int repetitions) {
  LatencyReport report;
  report.warmup_count = cfg.spectral.window_len - 1;
  std::vector<double> samples;
  for (int rep = 0; rep < repetitions; ++rep) {
    StreamState state(frames[0].rows, frames[0].cols, cfg);
    for (const auto& f : frames) state.push_frame(f);
    const auto& lat = state.latencies_ms();
    // Steady state only: skip the warm-up frames.
    for (std::size_t i = report.warmup_count; i < lat.size(); ++i)
      samples.push_back(lat[i]);
  }
  if (samples.empty()) return report;
  std::sort(samples.begin(), samples.end());
  report.measured = static_cast<int>(samples.size());
  auto quantile = [&](double q) {
    const std::size_t idx = std::min(
        samples.size() - 1,
        static_cast<std::size_t>(std::ceil(q * samples.size())) - 1);
    return samples[idx];
  };
  report.p50_ms = quantile(0.50);
  report.p95_ms = quantile(0.95);
  report.max_ms = samples.back();
  return report;
}

}  // namespace vibtrack
