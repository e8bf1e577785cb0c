// vibtrack: synthetic vibrating-needle sequences, per-pixel spectral
// detection, paired-window training and evaluation from one binary.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vibtrack/annotate.hpp"
#include "vibtrack/dataio.hpp"
#include "vibtrack/errors.hpp"
#include "vibtrack/eval.hpp"
#include "vibtrack/gradcheck.hpp"
#include "vibtrack/losses.hpp"
#include "vibtrack/model.hpp"
#include "vibtrack/pipeline.hpp"
#include "vibtrack/postproc.hpp"
#include "vibtrack/sim.hpp"
#include "vibtrack/spectral.hpp"
#include "vibtrack/trainer.hpp"

namespace fs = std::filesystem;
using namespace vibtrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitBudget = 4;

struct CommonDetectFlags {
  std::string source = "spectral";
  std::string params_path;
  double threshold = 0.5;
  double inlier_tol = 2.0;
  int iterations = 500;
  std::uint64_t seed = 20240817;
  double energy_floor = 1e-3;
  double mad_k = 8.0;
  int window_len = 30;
};

PipelineConfig make_pipeline_config(const CommonDetectFlags& f) {
  PipelineConfig cfg;
  cfg.spectral.window_len = f.window_len;
  cfg.detect.threshold = f.threshold;
  cfg.detect.inlier_tol = f.inlier_tol;
  cfg.detect.iterations = f.iterations;
  cfg.detect.seed = f.seed;
  cfg.energy_floor = f.energy_floor;
  cfg.mad_k = f.mad_k;
  if (f.source == "model") {
    cfg.source = DetectionSource::Model;
    if (f.params_path.empty())
      throw UsageError("--params is required with --source model");
    cfg.params = load_params(f.params_path);
  } else if (f.source == "spectral") {
    cfg.source = DetectionSource::SpectralThreshold;
  } else {
    throw UsageError("unknown --source (use spectral or model)");
  }
  return cfg;
}

void add_detect_flags(CLI::App* app, CommonDetectFlags& f) {
  app->add_option("--source", f.source, "Detection source: spectral|model");
  app->add_option("--params", f.params_path, "Model parameter file");
  app->add_option("--threshold", f.threshold, "Probability threshold (model path)");
  app->add_option("--tol", f.inlier_tol, "RANSAC inlier tolerance, px");
  app->add_option("--iters", f.iterations, "RANSAC iterations");
  app->add_option("--seed", f.seed, "RANSAC seed");
  app->add_option("--energy-floor", f.energy_floor,
                  "Absolute band-energy floor (spectral path)");
  app->add_option("--mad-k", f.mad_k, "MAD multiplier (spectral path)");
  app->add_option("--window", f.window_len, "Window length L");
}

void log_config(const std::string& name,
                const std::map<std::string, std::string>& kv) {
  std::cerr << "[vibtrack] " << name << ":";
  for (const auto& [k, v] : kv) std::cerr << " " << k << "=" << v;
  std::cerr << "\n";
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const std::string& out_dir, double angle, int frames,
                 std::uint64_t seed, int width, int height, double amplitude,
                 double fvib, double contrast, double speed, int advance,
                 int retract, double start_length, double needle_width,
                 const std::string& noise, double entry_r, double entry_c) {
  InsertionProfile profile;
  profile.entry = {entry_r, entry_c};
  profile.shaft_angle_deg = angle;
  profile.velocity_px = advance_retract_velocity(frames, speed, advance, retract);
  profile.start_length_px = start_length;
  profile.needle_contrast = contrast;
  profile.needle_width_px = needle_width;

  VibrationSpec vib;
  vib.f_vib = fvib;
  vib.amplitude_px = amplitude;

  SimOptions opts;
  opts.width = width;
  opts.height = height;
  opts.noise = noise == "frozen" ? NoiseMode::Frozen : NoiseMode::Live;

  log_config("simulate", {{"angle", std::to_string(angle)},
                          {"frames", std::to_string(frames)},
                          {"seed", std::to_string(seed)},
                          {"amplitude", std::to_string(amplitude)},
                          {"contrast", std::to_string(contrast)},
                          {"out", out_dir}});

  auto [frames_v, gts] = generate_sequence(profile, vib, seed, frames, 30.0, opts);
  Video video;
  video.frames = std::move(frames_v);
  video.gt = std::move(gts);
  video.fs = 30.0;
  write_video(out_dir, video, angle);
  std::cout << "wrote " << video.frames.size() << " frames to " << out_dir
            << "\n";
  return kExitOk;
}

// --- detect -----------------------------------------------------------------

void write_overlay(const std::string& dir, long frame_index, const GridD& image,
                   const Mask& mask, const std::optional<Detection>& det) {
  GridD overlay = image;
  for (int r = 0; r < mask.rows; ++r)
    for (int c = 0; c < mask.cols; ++c)
      if (mask.at(r, c)) overlay.at(r, c) = 200.0 / 255.0;
  if (det) {
    // Burn in the fitted line through the tip at the detected angle.
    const double rad = det->angle_deg * 3.14159265358979323846 / 180.0;
    const double dr = std::sin(rad), dc = std::cos(rad);
    const double diag = std::hypot(overlay.rows, overlay.cols);
    for (double t = -diag; t <= diag; t += 0.5) {
      const int r = static_cast<int>(std::lround(det->tip_px.r + t * dr));
      const int c = static_cast<int>(std::lround(det->tip_px.c + t * dc));
      if (overlay.in_bounds(r, c)) overlay.at(r, c) = 1.0;
    }
  }
  char name[48];
  std::snprintf(name, sizeof(name), "overlay_%06ld.pgm", frame_index);
  write_pgm(dir + "/" + std::string(name), overlay);
}

int cmd_detect(const std::string& in_dir, const std::string& out_file,
               const CommonDetectFlags& flags, const std::string& overlay_dir) {
  const Video video = read_video(in_dir);
  PipelineConfig cfg = make_pipeline_config(flags);
  cfg.spacing = video.frames.empty() ? Spacing{} : video.frames.front().spacing;
  log_config("detect", {{"in", in_dir},
                        {"out", out_file},
                        {"source", flags.source},
                        {"window", std::to_string(flags.window_len)}});

  std::ofstream os(out_file);
  if (!os) throw DataError("cannot open " + out_file + " for writing");
  os << "# frame,tip_row_px,tip_col_px,tip_x_mm,tip_y_mm,angle_deg,inlier_ratio\n";

  if (!overlay_dir.empty()) fs::create_directories(overlay_dir);

  // Streaming replay; overlays need the per-frame mask, so rerun the
  // detection on the current map when requested.
  StreamState state(video.frames.front().pixels.rows,
                    video.frames.front().pixels.cols, cfg);
  int emitted = 0;
  for (std::size_t i = 0; i < video.frames.size(); ++i) {
    const auto det = state.push_frame(video.frames[i].pixels);
    if (det) {
      os << format_detection(*det) << "\n";
      ++emitted;
    }
    if (!overlay_dir.empty() && state.warmed_up()) {
      BinarizeResult bin;
      detect_from_map(state.current_map(), cfg, static_cast<long>(i), &bin);
      write_overlay(overlay_dir, static_cast<long>(i), video.frames[i].pixels,
                    bin.mask, det);
    }
  }
  std::cout << "emitted " << emitted << " detections\n";
  return kExitOk;
}

// --- stream -----------------------------------------------------------------

int cmd_stream(const std::string& in_dir, int width, int height,
               const CommonDetectFlags& flags, double spacing_row,
               double spacing_col) {
  PipelineConfig cfg = make_pipeline_config(flags);
  if (!in_dir.empty()) {
    const Video video = read_video(in_dir);
    const auto dets = process_video(video, cfg);
    for (const auto& det : dets)
      if (det) std::cout << format_detection(*det) << "\n";
    return kExitOk;
  }
  // Raw 8-bit grayscale frames over standard input.
  if (width <= 0 || height <= 0)
    throw UsageError("--width and --height are required when reading stdin");
  cfg.spacing = {spacing_row, spacing_col};
  StreamState state(height, width, cfg);
  std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height);
  long frame = 0;
  while (std::cin.read(reinterpret_cast<char*>(buf.data()),
                       static_cast<std::streamsize>(buf.size()))) {
    GridD g(height, width);
    for (std::size_t i = 0; i < buf.size(); ++i) g.data[i] = buf[i] / 255.0;
    const auto det = state.push_frame(g);
    if (det) {
      std::cout << format_detection(*det) << "\n";
      std::cout.flush();
    }
    ++frame;
  }
  std::cerr << "[vibtrack] stream ended after " << frame << " frames\n";
  return kExitOk;
}

// --- dataset loading for train/ablate --------------------------------------

struct LoadedDataset {
  std::vector<Video> videos;  // stable storage; pointers below index into it
  std::vector<const Video*> train, val, test;
};

LoadedDataset load_dataset(const std::string& manifest_path) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  LoadedDataset ds;
  ds.videos.reserve(manifest.videos.size());
  std::vector<SplitKind> kinds;
  for (const auto& vm : manifest.videos) {
    fs::path p = vm.path;
    if (p.is_relative()) p = root / p;
    ds.videos.push_back(read_video(p.string()));
    kinds.push_back(vm.split);
  }
  for (std::size_t i = 0; i < ds.videos.size(); ++i) {
    const Video* v = &ds.videos[i];
    switch (kinds[i]) {
      case SplitKind::Train: ds.train.push_back(v); break;
      case SplitKind::Val: ds.val.push_back(v); break;
      case SplitKind::Test: ds.test.push_back(v); break;
    }
  }
  return ds;
}

std::vector<PairedSample> pairs_for(const std::vector<const Video*>& videos,
                                    const TrainConfig& cfg) {
  std::vector<PairedSample> pairs;
  for (const Video* v : videos) {
    const auto p = make_pairs(*v, cfg);
    pairs.insert(pairs.end(), p.begin(), p.end());
  }
  return pairs;
}

// --- train ------------------------------------------------------------------

int cmd_train(const std::string& manifest_path, const std::string& out_params,
              const std::string& history_path, double alpha, double beta,
              double lr, int batch, int max_epochs, std::uint64_t seed,
              int window_len, int delta) {
  LoadedDataset ds = load_dataset(manifest_path);
  if (ds.train.empty()) throw DataError("manifest has no training videos");

  TrainConfig cfg;
  cfg.learning_rate = lr;
  cfg.batch_size = batch;
  cfg.max_epochs = max_epochs;
  cfg.seed = seed;
  cfg.window_len = window_len;
  cfg.delta = delta;

  LossConfig loss_cfg;
  loss_cfg.alpha = alpha;
  loss_cfg.beta = beta;
  loss_cfg.delta = delta;

  SpectralConfig spectral;
  spectral.window_len = window_len;

  log_config("train", {{"manifest", manifest_path},
                       {"alpha", std::to_string(alpha)},
                       {"beta", std::to_string(beta)},
                       {"lr", std::to_string(lr)},
                       {"batch", std::to_string(batch)},
                       {"seed", std::to_string(seed)}});

  FeatureCache features(spectral);
  const auto train_pairs = pairs_for(ds.train, cfg);
  const auto val_pairs = pairs_for(ds.val, cfg);
  const TrainResult res = train(train_pairs, val_pairs, cfg, loss_cfg, features);
  save_params(res.params, out_params);
  if (!history_path.empty()) write_history_csv(res.history, history_path);
  std::cout << "trained " << res.epochs_run << " epochs, "
            << res.history.size() << " steps; params -> " << out_params << "\n";
  return kExitOk;
}

// --- ablate -----------------------------------------------------------------

int cmd_ablate(const std::string& manifest_path, const std::string& out_csv,
               std::uint64_t seed, int max_epochs, int window_len, int delta) {
  LoadedDataset ds = load_dataset(manifest_path);
  if (ds.train.empty() || ds.test.empty())
    throw DataError("ablation needs train and test videos in the manifest");

  TrainConfig cfg;
  cfg.seed = seed;
  cfg.max_epochs = max_epochs;
  cfg.window_len = window_len;
  cfg.delta = delta;
  LossConfig loss_cfg;
  SpectralConfig spectral;
  spectral.window_len = window_len;
  FeatureCache features(spectral);

  const auto train_pairs = pairs_for(ds.train, cfg);
  const auto val_pairs = pairs_for(ds.val, cfg);
  const std::vector<std::pair<double, double>> grid = {
      {0.0, 0.0}, {0.5, 0.0}, {0.5, 0.02}, {0.0, 0.02}};
  DetectOptions detect_opts;

  const auto rows = ablation_sweep(train_pairs, val_pairs, ds.test, grid, cfg,
                                   loss_cfg, features, detect_opts);
  std::ofstream os(out_csv);
  if (!os) throw DataError("cannot open " + out_csv + " for writing");
  os << "alpha,beta,tip_mean_mm,tip_std_mm,angle_mean_deg,angle_std_deg,"
        "success_rate_pct,samples,detected\n";
  for (const auto& row : rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.3g,%.3g,%s\n", row.alpha, row.beta,
                  summary_csv(row.summary).c_str());
    os << buf;
    std::printf("alpha=%.2f beta=%.3f tip=%.2f+-%.2f mm angle=%.2f+-%.2f deg "
                "success=%.1f%%\n",
                row.alpha, row.beta, row.summary.tip_mean, row.summary.tip_std,
                row.summary.angle_mean, row.summary.angle_std,
                row.summary.success_rate_pct);
  }
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

int cmd_eval(const std::string& pred_path, const std::string& gt_dir,
             const std::string& out_path, int window_len, double tip_thr,
             double angle_thr) {
  std::ifstream is(pred_path);
  if (!is) throw DataError("cannot open " + pred_path);
  std::map<long, Detection> dets;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (auto d = parse_detection(line)) dets[d->frame_index] = *d;
  }
  const Video video = read_video(gt_dir);
  const Spacing spacing = video.frames.front().spacing;

  std::vector<EvalRecord> records;
  for (int i = window_len - 1; i < static_cast<int>(video.frames.size()); ++i) {
    const auto it = dets.find(i);
    if (it == dets.end()) {
      records.push_back(make_missing_record(i));
    } else {
      records.push_back(make_record(i, it->second, video.gt[i].tip,
                                    video.gt[i].angle_deg, spacing, tip_thr,
                                    angle_thr));
    }
  }
  const EvalSummary summary = summarize(records);
  std::cout << summary_table(summary);
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    os << "tip_mean_mm,tip_std_mm,angle_mean_deg,angle_std_deg,"
          "success_rate_pct,samples,detected\n"
       << summary_csv(summary) << "\n";
  }
  return kExitOk;
}

// --- annotate ---------------------------------------------------------------

int cmd_annotate(const std::string& track_path, double tip_r, double tip_c,
                 double entry_r, double entry_c, long frame0, int rows,
                 int cols, double width_px, double spacing_row,
                 double spacing_col, double rough_angle, double max_dev,
                 const std::string& out_dir) {
  const TrackLog track = read_track_csv(track_path);
  const Spacing spacing{spacing_row, spacing_col};
  AnnotationBundle bundle;
  bundle.initial_frame = frame0;
  bundle.initial_tip = {tip_r, tip_c};
  bundle.entry_point = {entry_r, entry_c};
  bundle.tips = propagate(bundle.initial_tip, track, spacing, rows, cols);
  bundle.masks = render_masks(bundle.tips, bundle.entry_point, width_px, rows, cols);
  const QualityResult qc = quality_check(bundle, rough_angle, max_dev);
  bundle.accepted = qc.accepted;
  bundle.rejection_reason = qc.reason;

  fs::create_directories(out_dir);
  std::ofstream tips(out_dir + "/tips.csv");
  tips << "# frame,tip_row_px,tip_col_px,angle_deg\n";
  for (std::size_t i = 0; i < bundle.tips.size(); ++i) {
    char name[32], buf[128];
    std::snprintf(name, sizeof(name), "mask_%06zu.bin", i);
    write_packed_mask(out_dir + "/" + std::string(name), bundle.masks[i]);
    const double dr = bundle.tips[i].r - entry_r;
    const double dc = bundle.tips[i].c - entry_c;
    const double ang = wrap_line_angle(std::atan2(dr, dc) * 180.0 /
                                       3.14159265358979323846);
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g\n",
                  i + static_cast<std::size_t>(frame0), bundle.tips[i].r,
                  bundle.tips[i].c, ang);
    tips << buf;
  }
  std::ofstream sidecar(out_dir + "/annotation");
  sidecar << "initial_frame=" << frame0 << "\n"
          << "masks=" << bundle.masks.size() << "\n"
          << "accepted=" << (bundle.accepted ? "true" : "false") << "\n"
          << "reason=" << bundle.rejection_reason << "\n";
  std::cout << (bundle.accepted ? "accepted" : "rejected: " + qc.reason) << "\n";
  return kExitOk;
}

// --- split ------------------------------------------------------------------

int cmd_split(const std::string& root, std::uint64_t seed,
              const std::string& out_manifest, bool stratify) {
  std::vector<VideoMeta> videos;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    if (!fs::exists(entry.path() / "meta")) continue;
    VideoMeta vm;
    vm.id = entry.path().filename().string();
    vm.path = vm.id;  // relative to the manifest location
    vm.angle_deg = read_video_angle(entry.path().string());
    std::ifstream meta(entry.path() / "meta");
    std::string line;
    while (std::getline(meta, line))
      if (line.rfind("frames=", 0) == 0)
        vm.frame_count = std::stoi(line.substr(7));
    videos.push_back(std::move(vm));
  }
  if (videos.empty()) throw DataError("no video directories under " + root);
  DatasetManifest m = split(std::move(videos), {0.8, 0.1, 0.1}, seed, stratify);
  write_manifest(m, out_manifest);
  int tr = 0, va = 0, te = 0;
  for (const auto& v : m.videos) {
    if (v.split == SplitKind::Train) ++tr;
    else if (v.split == SplitKind::Val) ++va;
    else ++te;
  }
  std::printf("split %zu videos: %d train / %d val / %d test -> %s\n",
              m.videos.size(), tr, va, te, out_manifest.c_str());
  return kExitOk;
}

// --- losscheck --------------------------------------------------------------

int cmd_losscheck(int trials, std::uint64_t seed) {
  const GradCheckResult res = run_gradient_check(trials, seed);
  std::printf("prediction-gradient max relative error: %.3e (%d points)\n",
              res.max_rel_err_pred, res.pred_points);
  std::printf("parameter-gradient  max relative error: %.3e (%d points)\n",
              res.max_rel_err_params, res.param_points);
  const double worst = std::max(res.max_rel_err_pred, res.max_rel_err_params);
  std::printf("max relative error: %.3e\n", worst);
  return worst < 1e-5 ? kExitOk : 1;
}

// --- bench ------------------------------------------------------------------

int cmd_bench(int width, int height, int frames, int reps, double budget_ms,
              std::uint64_t seed) {
  InsertionProfile profile;
  profile.velocity_px = advance_retract_velocity(frames, 0.5, 40, 20);
  VibrationSpec vib;
  SimOptions opts;
  opts.width = width;
  opts.height = height;
  auto [sim_frames, gts] = generate_sequence(profile, vib, seed, frames, 30.0, opts);
  (void)gts;
  std::vector<GridD> grids;
  grids.reserve(sim_frames.size());
  for (auto& f : sim_frames) grids.push_back(std::move(f.pixels));

  PipelineConfig cfg;
  cfg.spacing = default_spacing(4.5, height, 51.3, width);
  const LatencyReport report = benchmark(cfg, grids, reps);
  std::printf("frames=%dx%d L=%d warmup=%d measured=%d\n", width, height,
              cfg.spectral.window_len, report.warmup_count, report.measured);
  std::printf("latency ms: p50=%.3f p95=%.3f max=%.3f (budget %.1f)\n",
              report.p50_ms, report.p95_ms, report.max_ms, budget_ms);
  return report.p95_ms <= budget_ms ? kExitOk : kExitBudget;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vibtrack: frequency-feature needle detection toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic insertion video");
  std::string sim_out;
  double sim_angle = 30.0, sim_amp = 1.0, sim_fvib = 2.5, sim_contrast = 0.3;
  double sim_speed = 0.5, sim_start = 20.0, sim_needle_w = 3.0;
  double sim_entry_r = 20.0, sim_entry_c = 10.0;
  int sim_frames = 300, sim_w = 256, sim_h = 256, sim_adv = 40, sim_ret = 20;
  std::uint64_t sim_seed = 1;
  std::string sim_noise = "live";
  sim_cmd->add_option("--out", sim_out, "Output video directory")->required();
  sim_cmd->add_option("--angle", sim_angle, "Insertion angle, deg");
  sim_cmd->add_option("--frames", sim_frames, "Frame count");
  sim_cmd->add_option("--seed", sim_seed, "Noise seed");
  sim_cmd->add_option("--width", sim_w, "Image width");
  sim_cmd->add_option("--height", sim_h, "Image height");
  sim_cmd->add_option("--amplitude", sim_amp, "Vibration amplitude, px");
  sim_cmd->add_option("--fvib", sim_fvib, "Vibration frequency, Hz");
  sim_cmd->add_option("--contrast", sim_contrast, "Needle contrast [0,1]");
  sim_cmd->add_option("--speed", sim_speed, "Insertion speed, px/frame");
  sim_cmd->add_option("--advance", sim_adv, "Advance frames per cycle");
  sim_cmd->add_option("--retract", sim_ret, "Retract frames per cycle");
  sim_cmd->add_option("--start-length", sim_start, "Initial shaft length, px");
  sim_cmd->add_option("--needle-width", sim_needle_w, "Needle width, px");
  sim_cmd->add_option("--noise", sim_noise, "Noise mode: live|frozen");
  sim_cmd->add_option("--entry-row", sim_entry_r, "Entry point row");
  sim_cmd->add_option("--entry-col", sim_entry_c, "Entry point column");

  // detect
  auto* det_cmd = app.add_subcommand("detect", "Detect on a recorded video");
  std::string det_in, det_out, det_overlay;
  CommonDetectFlags det_flags;
  det_cmd->add_option("--in", det_in, "Input video directory")->required();
  det_cmd->add_option("--out", det_out, "Output detection file")->required();
  det_cmd->add_option("--overlay", det_overlay, "Directory for overlay PGMs");
  add_detect_flags(det_cmd, det_flags);

  // stream
  auto* str_cmd = app.add_subcommand("stream", "Stream detection to stdout");
  std::string str_in;
  int str_w = 0, str_h = 0;
  double str_sr = 0.17578125, str_sc = 0.2003906;
  CommonDetectFlags str_flags;
  str_cmd->add_option("--in", str_in, "Video directory (omit to read stdin)");
  str_cmd->add_option("--width", str_w, "Frame width for stdin input");
  str_cmd->add_option("--height", str_h, "Frame height for stdin input");
  str_cmd->add_option("--spacing-row", str_sr, "Row spacing, mm/px");
  str_cmd->add_option("--spacing-col", str_sc, "Col spacing, mm/px");
  add_detect_flags(str_cmd, str_flags);

  // train
  auto* tr_cmd = app.add_subcommand("train", "Train the pixel classifier");
  std::string tr_manifest, tr_out, tr_hist;
  double tr_alpha = 0.5, tr_beta = 0.02, tr_lr = 1e-4;
  int tr_batch = 4, tr_epochs = 20, tr_window = 30, tr_delta = 5;
  std::uint64_t tr_seed = 1;
  tr_cmd->add_option("--data", tr_manifest, "Dataset manifest")->required();
  tr_cmd->add_option("--out", tr_out, "Output parameter file")->required();
  tr_cmd->add_option("--history", tr_hist, "Loss history CSV");
  tr_cmd->add_option("--alpha", tr_alpha, "Intersection loss weight");
  tr_cmd->add_option("--beta", tr_beta, "Difference loss weight");
  tr_cmd->add_option("--lr", tr_lr, "Learning rate");
  tr_cmd->add_option("--batch", tr_batch, "Batch size");
  tr_cmd->add_option("--epochs", tr_epochs, "Max epochs");
  tr_cmd->add_option("--seed", tr_seed, "Shuffle seed");
  tr_cmd->add_option("--window", tr_window, "Window length L");
  tr_cmd->add_option("--delta", tr_delta, "Frame offset between paired windows");

  // ablate
  auto* ab_cmd = app.add_subcommand("ablate", "Loss-configuration ablation sweep");
  std::string ab_manifest, ab_out;
  std::uint64_t ab_seed = 1;
  int ab_epochs = 10, ab_window = 30, ab_delta = 5;
  ab_cmd->add_option("--data", ab_manifest, "Dataset manifest")->required();
  ab_cmd->add_option("--out", ab_out, "Output CSV")->required();
  ab_cmd->add_option("--seed", ab_seed, "Shared training seed");
  ab_cmd->add_option("--epochs", ab_epochs, "Max epochs per cell");
  ab_cmd->add_option("--window", ab_window, "Window length L");
  ab_cmd->add_option("--delta", ab_delta, "Frame offset");

  // eval
  auto* ev_cmd = app.add_subcommand("eval", "Evaluate detections against ground truth");
  std::string ev_pred, ev_gt, ev_out;
  int ev_window = 30;
  double ev_tip = kTipErrorThresholdMm, ev_angle = kAngleErrorThresholdDeg;
  ev_cmd->add_option("--pred", ev_pred, "Detection file")->required();
  ev_cmd->add_option("--gt", ev_gt, "Ground-truth video directory")->required();
  ev_cmd->add_option("--out", ev_out, "Summary CSV");
  ev_cmd->add_option("--window", ev_window, "Window length L");
  ev_cmd->add_option("--tip-mm", ev_tip, "Tip success threshold, mm");
  ev_cmd->add_option("--angle-deg", ev_angle, "Angle success threshold, deg");

  // annotate
  auto* an_cmd = app.add_subcommand("annotate", "Propagate a tip annotation along a track log");
  std::string an_track, an_out;
  double an_tip_r = 0, an_tip_c = 0, an_entry_r = 0, an_entry_c = 0;
  double an_width = 3.0, an_sr = 0.1, an_sc = 0.1, an_rough = 30.0, an_maxdev = 5.0;
  long an_frame0 = 0;
  int an_rows = 256, an_cols = 256;
  an_cmd->add_option("--track", an_track, "Track log CSV")->required();
  an_cmd->add_option("--out", an_out, "Output directory")->required();
  an_cmd->add_option("--tip-row", an_tip_r, "Initial tip row, px")->required();
  an_cmd->add_option("--tip-col", an_tip_c, "Initial tip col, px")->required();
  an_cmd->add_option("--entry-row", an_entry_r, "Entry row, px")->required();
  an_cmd->add_option("--entry-col", an_entry_c, "Entry col, px")->required();
  an_cmd->add_option("--frame0", an_frame0, "Annotated frame index");
  an_cmd->add_option("--rows", an_rows, "Image rows");
  an_cmd->add_option("--cols", an_cols, "Image cols");
  an_cmd->add_option("--mask-width", an_width, "Mask width, px");
  an_cmd->add_option("--spacing-row", an_sr, "Row spacing, mm/px");
  an_cmd->add_option("--spacing-col", an_sc, "Col spacing, mm/px");
  an_cmd->add_option("--rough-angle", an_rough, "Rough angle estimate, deg");
  an_cmd->add_option("--max-dev", an_maxdev, "Max median angular deviation, deg");

  // split
  auto* sp_cmd = app.add_subcommand("split", "Stratified train/val/test split");
  std::string sp_root, sp_out;
  std::uint64_t sp_seed = 1;
  bool sp_no_strat = false;
  sp_cmd->add_option("--dir", sp_root, "Dataset root with video subdirectories")->required();
  sp_cmd->add_option("--out", sp_out, "Output manifest")->required();
  sp_cmd->add_option("--seed", sp_seed, "Shuffle seed");
  sp_cmd->add_flag("--no-stratify", sp_no_strat, "Disable angle stratification");

  // losscheck
  auto* lc_cmd = app.add_subcommand("losscheck", "Finite-difference gradient check");
  int lc_trials = 20;
  std::uint64_t lc_seed = 42;
  lc_cmd->add_option("--trials", lc_trials, "Random configurations to test");
  lc_cmd->add_option("--seed", lc_seed, "RNG seed");

  // bench
  auto* be_cmd = app.add_subcommand("bench", "Streaming latency benchmark");
  int be_w = 256, be_h = 256, be_frames = 90, be_reps = 3;
  double be_budget = 33.0;
  std::uint64_t be_seed = 1;
  be_cmd->add_option("--width", be_w, "Image width");
  be_cmd->add_option("--height", be_h, "Image height");
  be_cmd->add_option("--frames", be_frames, "Sequence length (>= 2L)");
  be_cmd->add_option("--reps", be_reps, "Repetitions");
  be_cmd->add_option("--budget-ms", be_budget, "p95 latency budget, ms");
  be_cmd->add_option("--seed", be_seed, "Simulation seed");

  try {
    app.parse(argc, argv);
    if (sim_cmd->parsed())
      return cmd_simulate(sim_out, sim_angle, sim_frames, sim_seed, sim_w, sim_h,
                          sim_amp, sim_fvib, sim_contrast, sim_speed, sim_adv,
                          sim_ret, sim_start, sim_needle_w, sim_noise,
                          sim_entry_r, sim_entry_c);
    if (det_cmd->parsed()) return cmd_detect(det_in, det_out, det_flags, det_overlay);
    if (str_cmd->parsed())
      return cmd_stream(str_in, str_w, str_h, str_flags, str_sr, str_sc);
    if (tr_cmd->parsed())
      return cmd_train(tr_manifest, tr_out, tr_hist, tr_alpha, tr_beta, tr_lr,
                       tr_batch, tr_epochs, tr_seed, tr_window, tr_delta);
    if (ab_cmd->parsed())
      return cmd_ablate(ab_manifest, ab_out, ab_seed, ab_epochs, ab_window, ab_delta);
    if (ev_cmd->parsed())
      return cmd_eval(ev_pred, ev_gt, ev_out, ev_window, ev_tip, ev_angle);
    if (an_cmd->parsed())
      return cmd_annotate(an_track, an_tip_r, an_tip_c, an_entry_r, an_entry_c,
                          an_frame0, an_rows, an_cols, an_width, an_sr, an_sc,
                          an_rough, an_maxdev, an_out);
    if (sp_cmd->parsed()) return cmd_split(sp_root, sp_seed, sp_out, !sp_no_strat);
    if (lc_cmd->parsed()) return cmd_losscheck(lc_trials, lc_seed);
    if (be_cmd->parsed())
      return cmd_bench(be_w, be_h, be_frames, be_reps, be_budget, be_seed);
    throw UsageError("no subcommand given");
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
