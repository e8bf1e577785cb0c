#pragma once

#include <string>
#include <vector>

#include "vibtrack/grid.hpp"

namespace vibtrack {

// Per-frame image-plane displacement of the tip, in mm. dx is lateral
// (columns), dy is axial (rows). One entry per frame after the annotated one.
struct TrackEntry {
  long frame = 0;
  double dx_mm = 0.0;
  double dy_mm = 0.0;
  double timestamp = 0.0;
};

struct TrackLog {
  std::vector<TrackEntry> entries;
};

struct AnnotationBundle {
  long initial_frame = 0;
  PointD initial_tip;
  PointD entry_point;
  int discard_prefix = 0;  // frames before the beam was reset
  std::vector<PointD> tips;
  std::vector<Mask> masks;
  bool accepted = true;
  std::string rejection_reason;
};

struct QualityResult {
  bool accepted = true;
  std::string reason;
};

// tip[0] is the initial tip; tip[t] = tip[t-1] + displacement[t] / spacing.
std::vector<PointD> propagate(const PointD& initial_tip_px, const TrackLog& track,
                              const Spacing& spacing, int image_rows,
                              int image_cols);

std::vector<Mask> render_masks(const std::vector<PointD>& tips,
                               const PointD& entry_point, double width_px,
                               int image_rows, int image_cols);

// Reject when the median per-frame |mask angle - rough estimate| (180-degree
// wrapped) exceeds max_deviation. Boundary is accepted.
QualityResult quality_check(const AnnotationBundle& bundle,
                            double rough_angle_deg, double max_deviation_deg);

TrackLog read_track_csv(const std::string& path);
void write_track_csv(const TrackLog& track, const std::string& path);

}  // namespace vibtrack
