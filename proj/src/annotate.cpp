#include "vibtrack/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vibtrack/errors.hpp"
#include "vibtrack/postproc.hpp"
#include "vibtrack/raster.hpp"

namespace vibtrack {

std::vector<PointD> propagate(const PointD& initial_tip_px, const TrackLog& track,
                              const Spacing& spacing, int image_rows,
                              int image_cols) {
  if (spacing.row_mm <= 0.0 || spacing.col_mm <= 0.0)
    throw InvalidProfile("pixel spacing must be positive");
  std::vector<PointD> tips;
  tips.reserve(track.entries.size() + 1);
  PointD tip = initial_tip_px;
  tips.push_back(tip);
  for (const auto& e : track.entries) {
    tip.r += e.dy_mm / spacing.row_mm;
    tip.c += e.dx_mm / spacing.col_mm;
    if (tip.r < 0.0 || tip.r > image_rows - 1 || tip.c < 0.0 ||
        tip.c > image_cols - 1)
      throw TipOutOfImage("propagated tip left the image bounds");
    tips.push_back(tip);
  }
  return tips;
}

std::vector<Mask> render_masks(const std::vector<PointD>& tips,
                               const PointD& entry_point, double width_px,
                               int image_rows, int image_cols) {
  if (width_px < 1.0) throw InvalidProfile("mask width must be >= 1 px");
  std::vector<Mask> masks;
  masks.reserve(tips.size());
  for (const auto& tip : tips) {
    if (tip.r == entry_point.r && tip.c == entry_point.c)
      throw DegenerateSegment("tip coincides with entry point");
    masks.push_back(
        render_segment_mask(image_rows, image_cols, entry_point, tip, width_px));
  }
  return masks;
}

QualityResult quality_check(const AnnotationBundle& bundle,
                            double rough_angle_deg, double max_deviation_deg) {
  if (max_deviation_deg <= 0.0)
    throw InvalidProfile("max deviation must be positive");
  std::vector<double> devs;
  devs.reserve(bundle.masks.size());
  for (std::size_t i = 0; i < bundle.masks.size(); ++i) {
    std::vector<PixelCoord> pts;
    const Mask& m = bundle.masks[i];
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c)
        if (m.at(r, c)) pts.push_back({r, c});
    if (pts.size() < 2) continue;
    const LineFit fit = fit_line_tls(pts);
    devs.push_back(std::fabs(wrap_line_angle(fit.angle_deg - rough_angle_deg)));
  }
  QualityResult res;
  if (devs.empty()) return res;
  std::sort(devs.begin(), devs.end());
  const std::size_t n = devs.size();
  const double median =
      n % 2 ? devs[n / 2] : 0.5 * (devs[n / 2 - 1] + devs[n / 2]);
  if (median > max_deviation_deg) {
    res.accepted = false;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "angular deviation %.1f > %.1f", median,
                  max_deviation_deg);
    res.reason = buf;
  }
  return res;
}

TrackLog read_track_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open track log " + path);
  TrackLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    TrackEntry e;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf", &e.frame, &e.dx_mm,
                    &e.dy_mm, &e.timestamp) >= 3)
      log.entries.push_back(e);
  }
  return log;
}

void write_track_csv(const TrackLog& track, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << "# frame,dx_mm,dy_mm,timestamp\n";
  for (const auto& e : track.entries) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%ld,%.9g,%.9g,%.9g\n", e.frame, e.dx_mm,
                  e.dy_mm, e.timestamp);
    os << buf;
  }
}

}  // namespace vibtrack
