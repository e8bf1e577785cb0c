#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vibtrack/grid.hpp"

namespace vibtrack {

struct PixelCoord {
  int r = 0;
  int c = 0;
  bool operator==(const PixelCoord&) const = default;
};

// Fitted shaft line. Angle in degrees from the image horizontal, in (-90, 90],
// positive when the line descends left-to-right (rows grow downward).
struct LineFit {
  double angle_deg = 0.0;
  PointD anchor;          // point on the line (inlier centroid after refit)
  PointD dir;             // unit direction, oriented away from the entry side
  int inlier_count = 0;
  double inlier_ratio = 0.0;
};

struct Detection {
  long frame_index = -1;
  PointD tip_px;
  double tip_x_mm = 0.0;  // lateral  (col * col spacing)
  double tip_y_mm = 0.0;  // axial    (row * row spacing)
  double angle_deg = 0.0;
  double inlier_ratio = 0.0;
};

struct BinarizeResult {
  Mask mask;
  std::vector<PixelCoord> positives;  // row-major order
};

// Defaults for the threshold -> RANSAC -> tip chain.
struct DetectOptions {
  double threshold = 0.5;
  double inlier_tol = 2.0;
  int iterations = 500;
  std::uint64_t seed = 20240817;
};

BinarizeResult binarize(const ProbabilityMap& map, double threshold);

// Best 2-point hypothesis by inlier count (ties broken by smaller
// perpendicular RMS over inliers), then a total-least-squares refit on the
// inlier set. Points are sorted row-major before seeded sampling so the result
// does not depend on input order.
LineFit ransac_line(std::span<const PixelCoord> points, double inlier_tol,
                    int iterations, std::uint64_t seed);

// Bottom-most positive of the mask (ties: farthest along the insertion
// direction), orthogonally projected onto the fitted line.
Detection extract_tip(const Mask& mask, const LineFit& fit,
                      const Spacing& spacing);

// Total-least-squares line through a point set (PCA direction).
LineFit fit_line_tls(std::span<const PixelCoord> points);

// One whitespace-free CSV record per detection.
std::string format_detection(const Detection& d);
std::optional<Detection> parse_detection(const std::string& line);

// Wrap an angle difference into (-90, 90] (lines are 180-degree periodic).
double wrap_line_angle(double deg);

}  // namespace vibtrack
