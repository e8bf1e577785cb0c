#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vibtrack/frame.hpp"
#include "vibtrack/grid.hpp"

namespace vibtrack {

struct VibrationSpec {
  double f_vib = 2.5;        // Hz
  double amplitude_px = 1.0;
  double phase = 0.0;        // rad
  // Unit displacement direction; zero means "perpendicular to the shaft".
  PointD direction{0.0, 0.0};
};

struct InsertionProfile {
  PointD entry{20.0, 10.0};
  double shaft_angle_deg = 30.0;  // from horizontal, positive downward
  // px/frame, signed (advance/retract). One entry is held constant; otherwise
  // the last entry repeats once the list is exhausted.
  std::vector<double> velocity_px{0.5};
  double start_length_px = 20.0;
  double needle_contrast = 0.3;  // brightness added above local background
  double needle_width_px = 3.0;
};

enum class NoiseMode { Frozen, Live };

struct SimOptions {
  int width = 256;
  int height = 256;
  NoiseMode noise = NoiseMode::Live;
  double jitter_std = 0.01;
  double depth_cm = 4.5;
  double footprint_mm = 51.3;
  // Fraction of the distal shaft rendered without added contrast, mimicking
  // intermittent visibility.
  double occlusion_frac = 0.0;
};

Spacing default_spacing(double depth_cm, int height_px, double footprint_mm,
                        int width_px);

// Velocity pattern for repeated advance / partial retract maneuvers.
std::vector<double> advance_retract_velocity(int n_frames, double speed_px,
                                             int advance_frames,
                                             int retract_frames);

std::pair<std::vector<Frame>, std::vector<GroundTruth>> generate_sequence(
    const InsertionProfile& profile, const VibrationSpec& vib,
    std::uint64_t noise_seed, int n_frames, double fs,
    const SimOptions& opts = {});

}  // namespace vibtrack
