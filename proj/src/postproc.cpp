#include "vibtrack/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "vibtrack/errors.hpp"

namespace vibtrack {

namespace {

constexpr double kRad2Deg = 180.0 / std::numbers::pi;

double perp_dist(const PixelCoord& p, const PointD& anchor, const PointD& dir) {
  const double vr = p.r - anchor.r, vc = p.c - anchor.c;
  return std::fabs(vr * dir.c - vc * dir.r);
}

double angle_from_dir(const PointD& dir) {
  return wrap_line_angle(std::atan2(dir.r, dir.c) * kRad2Deg);
}

}  // namespace

double wrap_line_angle(double deg) {
  while (deg > 90.0) deg -= 180.0;
  while (deg <= -90.0) deg += 180.0;
  return deg;
}

BinarizeResult binarize(const ProbabilityMap& map, double threshold) {
  BinarizeResult out;
  out.mask = Mask(map.rows, map.cols, 0);
  for (int r = 0; r < map.rows; ++r)
    for (int c = 0; c < map.cols; ++c)
      if (map.at(r, c) >= threshold) {
        out.mask.at(r, c) = 1;
        out.positives.push_back({r, c});
      }
  return out;
}

LineFit fit_line_tls(std::span<const PixelCoord> points) {
  const std::size_t n = points.size();
  if (n < 2) throw InsufficientPoints("need at least 2 points for a line");
  double mr = 0.0, mc = 0.0;
  for (const auto& p : points) {
    mr += p.r;
    mc += p.c;
  }
  mr /= static_cast<double>(n);
  mc /= static_cast<double>(n);
  double srr = 0.0, scc = 0.0, src = 0.0;
  for (const auto& p : points) {
    const double dr = p.r - mr, dc = p.c - mc;
    srr += dr * dr;
    scc += dc * dc;
    src += dr * dc;
  }
  if (srr == 0.0 && scc == 0.0)
    throw DegenerateInput("all points coincident");
  // Principal eigenvector of [[srr, src], [src, scc]].
  const double tr = srr + scc;
  const double det = srr * scc - src * src;
  const double lambda = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4 * det)));
  double dr, dc;
  if (std::fabs(src) > 1e-12) {
    dr = lambda - scc;
    dc = src;
  } else if (srr >= scc) {
    dr = 1.0;
    dc = 0.0;
  } else {
    dr = 0.0;
    dc = 1.0;
  }
  const double norm = std::hypot(dr, dc);
  dr /= norm;
  dc /= norm;
  // Canonical orientation: point down the image (insertion direction).
  if (dr < 0.0 || (dr == 0.0 && dc < 0.0)) {
    dr = -dr;
    dc = -dc;
  }
  LineFit fit;
  fit.anchor = {mr, mc};
  fit.dir = {dr, dc};
  fit.angle_deg = angle_from_dir(fit.dir);
  fit.inlier_count = static_cast<int>(n);
  fit.inlier_ratio = 1.0;
  return fit;
}

LineFit ransac_line(std::span<const PixelCoord> points, double inlier_tol,
                    int iterations, std::uint64_t seed) {
  if (points.size() < 2)
    throw InsufficientPoints("RANSAC needs at least 2 points");
  std::vector<PixelCoord> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const PixelCoord& a, const PixelCoord& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  bool all_same = true;
  for (const auto& p : pts)
    if (!(p == pts.front())) {
      all_same = false;
      break;
    }
  if (all_same) throw DegenerateInput("all points coincident");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);

  int best_count = -1;
  double best_rms = 0.0;
  PointD best_anchor, best_dir;
  for (int it = 0; it < iterations; ++it) {
    const auto a = pts[pick(rng)];
    PixelCoord b = a;
    for (int tries = 0; tries < 64 && b == a; ++tries) b = pts[pick(rng)];
    if (b == a) continue;
    double dr = b.r - a.r, dc = b.c - a.c;
    const double norm = std::hypot(dr, dc);
    dr /= norm;
    dc /= norm;
    const PointD anchor{static_cast<double>(a.r), static_cast<double>(a.c)};
    const PointD dir{dr, dc};
    int count = 0;
    double ss = 0.0;
    for (const auto& p : pts) {
      const double d = perp_dist(p, anchor, dir);
      if (d <= inlier_tol) {
        ++count;
        ss += d * d;
      }
    }
    const double rms = std::sqrt(ss / std::max(count, 1));
    if (count > best_count || (count == best_count && rms < best_rms)) {
      best_count = count;
      best_rms = rms;
      best_anchor = anchor;
      best_dir = dir;
    }
  }
  if (best_count < 2) throw DegenerateInput("no usable hypothesis found");

  std::vector<PixelCoord> inliers;
  inliers.reserve(best_count);
  for (const auto& p : pts)
    if (perp_dist(p, best_anchor, best_dir) <= inlier_tol)
      inliers.push_back(p);

  LineFit fit = fit_line_tls(inliers);
  // Report consensus against the refitted line.
  int count = 0;
  for (const auto& p : pts)
    if (perp_dist(p, fit.anchor, fit.dir) <= inlier_tol) ++count;
  fit.inlier_count = count;
  fit.inlier_ratio = static_cast<double>(count) / static_cast<double>(pts.size());
  return fit;
}

Detection extract_tip(const Mask& mask, const LineFit& fit,
                      const Spacing& spacing) {
  int best_r = -1, best_c = -1;
  double best_proj = 0.0;
  for (int r = 0; r < mask.rows; ++r)
    for (int c = 0; c < mask.cols; ++c)
      if (mask.at(r, c)) {
        const double proj = (r - fit.anchor.r) * fit.dir.r +
                            (c - fit.anchor.c) * fit.dir.c;
        if (r > best_r || (r == best_r && proj > best_proj)) {
          best_r = r;
          best_c = c;
          best_proj = proj;
        }
      }
  if (best_r < 0) throw EmptyMask("no positive pixels");

  // Orthogonal projection onto the fitted line.
  const double t = (best_r - fit.anchor.r) * fit.dir.r +
                   (best_c - fit.anchor.c) * fit.dir.c;
  Detection det;
  det.tip_px = {fit.anchor.r + t * fit.dir.r, fit.anchor.c + t * fit.dir.c};
  det.tip_x_mm = det.tip_px.c * spacing.col_mm;
  det.tip_y_mm = det.tip_px.r * spacing.row_mm;
  det.angle_deg = fit.angle_deg;
  det.inlier_ratio = fit.inlier_ratio;
  return det;
}

std::string format_detection(const Detection& d) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.6g",
                d.frame_index, d.tip_px.r, d.tip_px.c, d.tip_x_mm, d.tip_y_mm,
                d.angle_deg, d.inlier_ratio);
  return buf;
}

std::optional<Detection> parse_detection(const std::string& line) {
  Detection d;
  if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf,%lf,%lf", &d.frame_index,
                  &d.tip_px.r, &d.tip_px.c, &d.tip_x_mm, &d.tip_y_mm,
                  &d.angle_deg, &d.inlier_ratio) != 7)
    return std::nullopt;
  return d;
}

}  // namespace vibtrack
