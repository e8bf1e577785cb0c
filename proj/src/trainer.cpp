#include "vibtrack/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "vibtrack/errors.hpp"

namespace vibtrack {

std::vector<PairedSample> make_pairs(const Video& video, const TrainConfig& cfg) {
  const int t = static_cast<int>(video.frames.size());
  const int l = cfg.window_len, d = cfg.delta;
  if (t < l + d) throw VideoTooShort("need at least L+delta frames for a pair");
  std::vector<PairedSample> pairs;
  // One pair per valid end index of the later window.
  for (int end = l + d - 1; end < t; ++end)
    pairs.push_back({&video, end - d, end});
  return pairs;
}

const FeatureMap& FeatureCache::get(const Video* video, int end_index) {
  const auto key = std::make_pair(video, end_index);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const int l = cfg_.window_len;
  if (end_index < l - 1 || end_index >= static_cast<int>(video->frames.size()))
    throw WindowLengthMismatch("window end index out of range");
  std::span<const Frame> window(&video->frames[end_index - l + 1],
                                static_cast<std::size_t>(l));
  return cache_.emplace(key, band_energy_map(window, cfg_)).first->second;
}

namespace {

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

void adam_step(ModelParams& params, const ParamGrad& grad, AdamState& state,
               const TrainConfig& cfg) {
  const int dim = params.dim();
  if (state.m.empty()) {
    state.m.assign(dim + 1, 0.0);
    state.v.assign(dim + 1, 0.0);
  }
  ++state.t;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double corr1 = 1.0 - std::pow(b1, state.t);
  const double corr2 = 1.0 - std::pow(b2, state.t);
  auto update = [&](double& p, double g, int i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / corr1;
    const double vhat = state.v[i] / corr2;
    p -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
  };
  for (int i = 0; i < dim; ++i) update(params.weights[i], grad.weights[i], i);
  update(params.bias, grad.bias, dim);
}

TotalLossParts eval_pair(const PairedSample& s, const ModelParams& params,
                         const LossConfig& loss_cfg, FeatureCache& features,
                         bool diff_active, ParamGrad* grad_out) {
  const FeatureMap& fa = features.get(s.video, s.end_t);
  const FeatureMap& fb = features.get(s.video, s.end_td);
  const Mask& gt_a = s.video->gt[s.end_t].mask;
  const Mask& gt_b = s.video->gt[s.end_td].mask;
  const ProbabilityMap pa = forward(fa, params);
  const ProbabilityMap pb = forward(fb, params);
  const TotalLossParts parts =
      total_loss_parts(pa, pb, gt_a, gt_b, loss_cfg, diff_active);
  if (grad_out) {
    auto [ga, gb] = total_loss_gradient(pa, pb, gt_a, gt_b, loss_cfg, diff_active);
    const ParamGrad pga = backward(fa, params, ga);
    const ParamGrad pgb = backward(fb, params, gb);
    for (std::size_t i = 0; i < grad_out->weights.size(); ++i)
      grad_out->weights[i] += pga.weights[i] + pgb.weights[i];
    grad_out->bias += pga.bias + pgb.bias;
  }
  return parts;
}

}  // namespace

TrainResult train(std::span<const PairedSample> train_set,
                  std::span<const PairedSample> val_set, const TrainConfig& cfg,
                  const LossConfig& loss_cfg, FeatureCache& features) {
  if (train_set.empty()) throw EmptyDataset("training set is empty");

  const int bands =
      features.get(train_set[0].video, train_set[0].end_t).bands;
  TrainResult res;
  res.params = ModelParams::zeros(bands);
  ModelParams best = res.params;
  double best_val = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;

  AdamState adam;
  long step = 0;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const bool diff_active = epoch >= cfg.diff_loss_start_epoch;
    // Epoch-seeded Fisher-Yates keeps runs bit-reproducible.
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(epoch) * 0x9e3779b9);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }

    double epoch_loss = 0.0;
    long epoch_steps = 0;
    for (std::size_t base = 0; base < order.size(); base += cfg.batch_size) {
      const std::size_t count =
          std::min<std::size_t>(cfg.batch_size, order.size() - base);
      ParamGrad grad;
      grad.weights.assign(res.params.dim(), 0.0);
      TotalLossParts mean;
      for (std::size_t j = 0; j < count; ++j) {
        const TotalLossParts p = eval_pair(train_set[order[base + j]],
                                           res.params, loss_cfg, features,
                                           diff_active, &grad);
        mean.focal_t += p.focal_t;
        mean.focal_td += p.focal_td;
        mean.inter += p.inter;
        mean.diff += p.diff;
      }
      const double inv = 1.0 / static_cast<double>(count);
      mean.focal_t *= inv;
      mean.focal_td *= inv;
      mean.inter *= inv;
      mean.diff *= inv;
      // Recombine from the averaged parts so the recorded total is bitwise
      // the active-term combination (the diff term is absent before its
      // start epoch).
      mean.total = mean.focal_t + mean.focal_td + loss_cfg.alpha * mean.inter +
                   (diff_active ? loss_cfg.beta * mean.diff : 0.0);
      for (auto& g : grad.weights) g *= inv;
      grad.bias *= inv;
      if (!std::isfinite(mean.total))
        throw NonFiniteLoss("training loss became non-finite at step " +
                            std::to_string(step));
      adam_step(res.params, grad, adam, cfg);
      ++step;
      res.history.push_back({step, epoch, mean.focal_t, mean.focal_td,
                             mean.inter, mean.diff, mean.total});
      epoch_loss += mean.total;
      ++epoch_steps;
    }
    res.epoch_train_loss.push_back(epoch_loss / static_cast<double>(epoch_steps));
    res.epochs_run = epoch;

    if (!val_set.empty()) {
      double val_loss = 0.0;
      for (const auto& s : val_set)
        val_loss +=
            eval_pair(s, res.params, loss_cfg, features, true, nullptr).total;
      val_loss /= static_cast<double>(val_set.size());
      res.epoch_val_loss.push_back(val_loss);
      if (val_loss < best_val) {
        best_val = val_loss;
        best = res.params;
        stale_epochs = 0;
      } else if (++stale_epochs >= cfg.patience) {
        res.params = best;
        break;
      }
    }
  }
  if (!val_set.empty() && best_val < std::numeric_limits<double>::infinity() &&
      !res.epoch_val_loss.empty() && res.epoch_val_loss.back() > best_val)
    res.params = best;
  return res;
}

EvalSummary evaluate_model(const ModelParams& params,
                           std::span<const Video* const> videos,
                           FeatureCache& features, const DetectOptions& opts,
                           int stride) {
  std::vector<EvalRecord> records;
  long frame_id = 0;
  const int l = features.config().window_len;
  for (const Video* video : videos) {
    const int t = static_cast<int>(video->frames.size());
    for (int end = l - 1; end < t; end += stride, ++frame_id) {
      const FeatureMap& f = features.get(video, end);
      const ProbabilityMap prob = forward(f, params);
      const auto bin = binarize(prob, opts.threshold);
      const auto& gt = video->gt[end];
      const Spacing spacing = video->frames[end].spacing;
      try {
        const LineFit fit = ransac_line(bin.positives, opts.inlier_tol,
                                        opts.iterations, opts.seed);
        const Detection det = extract_tip(bin.mask, fit, spacing);
        records.push_back(
            make_record(frame_id, det, gt.tip, gt.angle_deg, spacing));
      } catch (const Error&) {
        records.push_back(make_missing_record(frame_id));
      }
    }
  }
  return summarize(records);
}

std::vector<AblationRow> ablation_sweep(
    std::span<const PairedSample> train_set,
    std::span<const PairedSample> val_set,
    std::span<const Video* const> test_videos,
    std::span<const std::pair<double, double>> grid, const TrainConfig& cfg,
    const LossConfig& base_loss, FeatureCache& features,
    const DetectOptions& detect_opts) {
  std::vector<AblationRow> rows;
  for (const auto& [alpha, beta] : grid) {
    LossConfig loss_cfg = base_loss;
    loss_cfg.alpha = alpha;
    loss_cfg.beta = beta;
    const TrainResult res = train(train_set, val_set, cfg, loss_cfg, features);
    AblationRow row;
    row.alpha = alpha;
    row.beta = beta;
    row.summary = evaluate_model(res.params, test_videos, features, detect_opts);
    rows.push_back(row);
  }
  return rows;
}

void write_history_csv(std::span<const HistoryRow> history,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << "step,epoch,L_f_t,L_f_td,L_inter,L_diff,total\n";
  for (const auto& h : history) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%ld,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", h.step,
                  h.epoch, h.focal_t, h.focal_td, h.inter, h.diff, h.total);
    os << buf;
  }
}

}  // namespace vibtrack
