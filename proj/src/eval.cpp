#include "vibtrack/eval.hpp"

#include <cmath>
#include <cstdio>

#include "vibtrack/errors.hpp"

namespace vibtrack {

double tip_error_mm(const PointD& pred_px, const PointD& gt_px,
                    const Spacing& spacing) {
  const double dy = (pred_px.r - gt_px.r) * spacing.row_mm;
  const double dx = (pred_px.c - gt_px.c) * spacing.col_mm;
  return std::hypot(dx, dy);
}

double angle_error_deg(double pred_deg, double gt_deg) {
  return std::fabs(wrap_line_angle(pred_deg - gt_deg));
}

EvalRecord make_record(long frame_id, const Detection& det, const PointD& gt_tip,
                       double gt_angle_deg, const Spacing& spacing,
                       double tip_thr_mm, double angle_thr_deg) {
  EvalRecord rec;
  rec.frame_id = frame_id;
  rec.tip_error_mm = tip_error_mm(det.tip_px, gt_tip, spacing);
  rec.angle_error_deg = angle_error_deg(det.angle_deg, gt_angle_deg);
  rec.success =
      *rec.tip_error_mm < tip_thr_mm && *rec.angle_error_deg < angle_thr_deg;
  return rec;
}

EvalRecord make_missing_record(long frame_id) {
  EvalRecord rec;
  rec.frame_id = frame_id;
  rec.success = false;
  return rec;
}

EvalSummary summarize(std::span<const EvalRecord> records) {
  if (records.empty()) throw EmptyRecordSet("no evaluation records");
  EvalSummary s;
  s.sample_count = static_cast<int>(records.size());
  double tip_sum = 0.0, tip_sq = 0.0, ang_sum = 0.0, ang_sq = 0.0;
  int successes = 0;
  for (const auto& r : records) {
    if (r.success) ++successes;
    if (r.tip_error_mm && r.angle_error_deg) {
      ++s.detected_count;
      tip_sum += *r.tip_error_mm;
      tip_sq += *r.tip_error_mm * *r.tip_error_mm;
      ang_sum += *r.angle_error_deg;
      ang_sq += *r.angle_error_deg * *r.angle_error_deg;
    }
  }
  if (s.detected_count > 0) {
    const double n = s.detected_count;
    s.tip_mean = tip_sum / n;
    s.angle_mean = ang_sum / n;
    // population std over the detected set
    s.tip_std = std::sqrt(std::max(0.0, tip_sq / n - s.tip_mean * s.tip_mean));
    s.angle_std =
        std::sqrt(std::max(0.0, ang_sq / n - s.angle_mean * s.angle_mean));
  }
  s.success_rate_pct =
      100.0 * static_cast<double>(successes) / static_cast<double>(s.sample_count);
  return s;
}

std::string summary_csv(const EvalSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g,%.6g,%.4g,%d,%d", s.tip_mean,
                s.tip_std, s.angle_mean, s.angle_std, s.success_rate_pct,
                s.sample_count, s.detected_count);
  return buf;
}

std::string summary_table(const EvalSummary& s) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "Tip Err. (mm)   Angle Err. (deg)   Suc. Rate (%%)   N\n"
                "%.2f +- %.2f    %.2f +- %.2f       %.1f            %d\n",
                s.tip_mean, s.tip_std, s.angle_mean, s.angle_std,
                s.success_rate_pct, s.sample_count);
  return buf;
}

}  // namespace vibtrack
