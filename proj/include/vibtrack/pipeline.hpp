#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vibtrack/frame.hpp"
#include "vibtrack/model.hpp"
#include "vibtrack/postproc.hpp"
#include "vibtrack/spectral.hpp"

namespace vibtrack {

enum class DetectionSource { SpectralThreshold, Model };

struct PipelineConfig {
  SpectralConfig spectral;
  DetectionSource source = DetectionSource::SpectralThreshold;
  ModelParams params;    // model path only
  DetectOptions detect;  // threshold applies to the model path
  // Spectral-threshold path: cut at max(energy_floor, median + mad_k * MAD)
  // of the per-pixel band-energy sum.
  double energy_floor = 1e-3;
  double mad_k = 8.0;
  int renorm_interval = 256;
  int min_positives = 8;
  Spacing spacing;
};

// Streaming detector: ring of the last L frames plus sliding-DFT accumulators.
// Warm-up (the first L-1 frames) yields no detections.
class StreamState {
 public:
  StreamState(int rows, int cols, PipelineConfig cfg);

  // Returns a detection once warmed up and the frame yields a usable mask.
  std::optional<Detection> push_frame(const GridD& frame);

  long frames_pushed() const { return pushed_; }
  bool warmed_up() const { return sdft_.has_value(); }
  int warmup_count() const { return cfg_.spectral.window_len - 1; }
  const std::optional<Detection>& latest() const { return latest_; }
  const std::vector<double>& latencies_ms() const { return latencies_ms_; }
  FeatureMap current_map() const;
  const PipelineConfig& config() const { return cfg_; }

 private:
  std::optional<Detection> detect_current();

  PipelineConfig cfg_;
  int rows_, cols_;
  long pushed_ = 0;
  std::vector<GridD> pending_;  // warm-up frames
  std::optional<SlidingDft> sdft_;
  std::optional<Detection> latest_;
  std::vector<double> latencies_ms_;  // post-warm-up only
};

// Detection attempt on one precomputed feature map (shared by the streaming
// and batch paths).
std::optional<Detection> detect_from_map(const FeatureMap& map,
                                         const PipelineConfig& cfg,
                                         long frame_index,
                                         BinarizeResult* mask_out = nullptr);

// Offline replay of a recorded video through the streaming path.
std::vector<std::optional<Detection>> process_video(const Video& video,
                                                    const PipelineConfig& cfg);

// Batch reference: one band_energy_map per trailing window.
std::vector<std::optional<Detection>> process_video_batch(
    const Video& video, const PipelineConfig& cfg);

struct LatencyReport {
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  int warmup_count = 0;
  int measured = 0;
};

LatencyReport benchmark(const PipelineConfig& cfg,
                        std::span<const GridD> frames, int repetitions);

}  // namespace vibtrack
