#pragma once

#include <vector>

#include "vibtrack/grid.hpp"

namespace vibtrack {

// One grayscale image with acquisition metadata. Intensities live in [0,1].
struct Frame {
  GridD pixels;
  double timestamp = 0.0;  // seconds
  Spacing spacing;
};

// Per-frame ground truth: sub-pixel tip, shaft angle and the binary mask.
// Angle is degrees from the image horizontal, positive downward.
struct GroundTruth {
  PointD tip;
  double angle_deg = 0.0;
  Mask mask;
};

struct Video {
  std::vector<Frame> frames;
  std::vector<GroundTruth> gt;
  double fs = 30.0;
};

}  // namespace vibtrack
