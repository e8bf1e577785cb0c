#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vibtrack/grid.hpp"
#include "vibtrack/postproc.hpp"

namespace vibtrack {

// Success thresholds are strict: exactly 10.0 mm / 15.0 deg is a failure.
constexpr double kTipErrorThresholdMm = 10.0;
constexpr double kAngleErrorThresholdDeg = 15.0;

struct EvalRecord {
  long frame_id = -1;
  // Missing errors mean the detector produced no detection for this frame;
  // the record still counts in the success-rate denominator.
  std::optional<double> tip_error_mm;
  std::optional<double> angle_error_deg;
  bool success = false;
};

struct EvalSummary {
  double tip_mean = 0.0, tip_std = 0.0;
  double angle_mean = 0.0, angle_std = 0.0;
  double success_rate_pct = 0.0;
  int sample_count = 0;     // all records
  int detected_count = 0;   // records with measured errors
};

double tip_error_mm(const PointD& pred_px, const PointD& gt_px,
                    const Spacing& spacing);
double angle_error_deg(double pred_deg, double gt_deg);

EvalRecord make_record(long frame_id, const Detection& det, const PointD& gt_tip,
                       double gt_angle_deg, const Spacing& spacing,
                       double tip_thr_mm = kTipErrorThresholdMm,
                       double angle_thr_deg = kAngleErrorThresholdDeg);
EvalRecord make_missing_record(long frame_id);

EvalSummary summarize(std::span<const EvalRecord> records);

std::string summary_csv(const EvalSummary& s);
std::string summary_table(const EvalSummary& s);

}  // namespace vibtrack
