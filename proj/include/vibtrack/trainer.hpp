#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vibtrack/eval.hpp"
#include "vibtrack/frame.hpp"
#include "vibtrack/losses.hpp"
#include "vibtrack/model.hpp"
#include "vibtrack/postproc.hpp"
#include "vibtrack/spectral.hpp"

namespace vibtrack {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 4;
  int delta = 5;
  int window_len = 30;
  int max_epochs = 20;
  int patience = 2;
  int diff_loss_start_epoch = 2;  // 1-based epoch index
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
};

// Two windows from one video whose final frames are delta apart.
struct PairedSample {
  const Video* video = nullptr;
  int end_t = 0;   // final frame of the earlier window
  int end_td = 0;  // = end_t + delta
};

std::vector<PairedSample> make_pairs(const Video& video, const TrainConfig& cfg);

struct HistoryRow {
  long step = 0;
  int epoch = 0;
  double focal_t = 0.0, focal_td = 0.0, inter = 0.0, diff = 0.0, total = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<HistoryRow> history;
  std::vector<double> epoch_train_loss;  // mean total per epoch
  std::vector<double> epoch_val_loss;
  int epochs_run = 0;
};

// Caches band-energy maps keyed by (video, window end index).
class FeatureCache {
 public:
  explicit FeatureCache(SpectralConfig cfg) : cfg_(std::move(cfg)) {}
  const FeatureMap& get(const Video* video, int end_index);
  const SpectralConfig& config() const { return cfg_; }

 private:
  SpectralConfig cfg_;
  std::map<std::pair<const Video*, int>, FeatureMap> cache_;
};

TrainResult train(std::span<const PairedSample> train_set,
                  std::span<const PairedSample> val_set, const TrainConfig& cfg,
                  const LossConfig& loss_cfg, FeatureCache& features);

// Per-window detection on the final frame of every stride-th window.
EvalSummary evaluate_model(const ModelParams& params,
                           std::span<const Video* const> videos,
                           FeatureCache& features, const DetectOptions& opts,
                           int stride = 5);

struct AblationRow {
  double alpha = 0.0;
  double beta = 0.0;
  EvalSummary summary;
};

// Trains one model per (alpha, beta) cell with identical seed and schedule,
// then evaluates each on the held-out videos.
std::vector<AblationRow> ablation_sweep(
    std::span<const PairedSample> train_set,
    std::span<const PairedSample> val_set,
    std::span<const Video* const> test_videos,
    std::span<const std::pair<double, double>> grid, const TrainConfig& cfg,
    const LossConfig& base_loss, FeatureCache& features,
    const DetectOptions& detect_opts);

void write_history_csv(std::span<const HistoryRow> history,
                       const std::string& path);

}  // namespace vibtrack
