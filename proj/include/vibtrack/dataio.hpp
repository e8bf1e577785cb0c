#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vibtrack/frame.hpp"
#include "vibtrack/grid.hpp"

namespace vibtrack {

enum class SplitKind { Train, Val, Test };

const char* split_name(SplitKind s);

struct VideoMeta {
  std::string id;
  double angle_deg = 0.0;
  int frame_count = 0;
  std::string path;
  SplitKind split = SplitKind::Train;
};

struct DatasetManifest {
  double fs = 30.0;
  Spacing spacing;
  int window_len = 30;
  std::vector<VideoMeta> videos;
};

// Directory layout per video: `meta` text record, frames as 8-bit PGM files
// (frame_NNNNNN.pgm), masks packed 1 bpp with a 12-byte header
// (mask_NNNNNN.bin), tips as CSV.
void write_video(const std::string& dir, const Video& video, double angle_deg);
Video read_video(const std::string& dir);
double read_video_angle(const std::string& dir);

void write_pgm(const std::string& path, const GridD& pixels);
GridD read_pgm(const std::string& path);

void write_packed_mask(const std::string& path, const Mask& mask);
Mask read_packed_mask(const std::string& path);

void write_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

// Stratified 80/10/10 split. Videos are canonically sorted by id before the
// seeded shuffle, so the result is stable under input reordering.
DatasetManifest split(std::vector<VideoMeta> videos,
                      const std::array<double, 3>& fractions, std::uint64_t seed,
                      bool stratify_by_angle);

// Per-stratum counts for one split call; exposed for testing.
std::array<int, 3> split_counts(int n, const std::array<double, 3>& fractions);

int count_sequences(int frame_count, int window_len, int stride = 1);

struct AugmentOps {
  bool hflip = false;
  double contrast = 1.0;    // p <- clamp(0.5 + (p-0.5)*c)
  double brightness = 0.0;  // p <- clamp(p + b)
};

struct AugmentRanges {
  double contrast_lo = 0.8, contrast_hi = 1.2;
  double brightness_lo = -0.1, brightness_hi = 0.1;
};

AugmentOps sample_augment(std::mt19937_64& rng, const AugmentRanges& ranges);

// The same transform is applied to every frame of the window, keeping the
// temporal spectrum intact.
void augment_window(std::vector<GridD>& frames, std::vector<Mask>& masks,
                    double& angle_deg, const AugmentOps& ops);

}  // namespace vibtrack
