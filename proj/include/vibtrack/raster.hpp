#pragma once

#include <algorithm>
#include <cmath>

#include "vibtrack/grid.hpp"

namespace vibtrack {

inline double dist_to_segment(const PointD& p, const PointD& a,
                              const PointD& b) {
  const double vr = b.r - a.r, vc = b.c - a.c;
  const double wr = p.r - a.r, wc = p.c - a.c;
  const double len2 = vr * vr + vc * vc;
  double t = len2 > 0.0 ? (wr * vr + wc * vc) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dr = wr - t * vr, dc = wc - t * vc;
  return std::hypot(dr, dc);
}

// Along-segment parameter in [0,1] of the closest point.
inline double segment_param(const PointD& p, const PointD& a, const PointD& b) {
  const double vr = b.r - a.r, vc = b.c - a.c;
  const double len2 = vr * vr + vc * vc;
  if (len2 <= 0.0) return 0.0;
  return std::clamp(((p.r - a.r) * vr + (p.c - a.c) * vc) / len2, 0.0, 1.0);
}

// Binary thick segment: pixel positive iff its center lies within width/2 of
// the segment.
inline Mask render_segment_mask(int rows, int cols, const PointD& a,
                                const PointD& b, double width) {
  Mask m(rows, cols, 0);
  const double half = width / 2.0;
  const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.r, b.r) - half - 1)));
  const int r1 = std::min(rows - 1, static_cast<int>(std::ceil(std::max(a.r, b.r) + half + 1)));
  const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.c, b.c) - half - 1)));
  const int c1 = std::min(cols - 1, static_cast<int>(std::ceil(std::max(a.c, b.c) + half + 1)));
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (dist_to_segment({static_cast<double>(r), static_cast<double>(c)}, a,
                          b) <= half)
        m.at(r, c) = 1;
  return m;
}

// Anti-aliased coverage in [0,1] of a thick segment at one pixel center.
inline double segment_coverage(const PointD& p, const PointD& a,
                               const PointD& b, double width) {
  const double d = dist_to_segment(p, a, b);
  return std::clamp(width / 2.0 + 0.5 - d, 0.0, 1.0);
}

// Bilinear sample with clamped coordinates; exact at integer coordinates.
inline double bilinear(const GridD& g, double r, double c) {
  r = std::clamp(r, 0.0, static_cast<double>(g.rows - 1));
  c = std::clamp(c, 0.0, static_cast<double>(g.cols - 1));
  const int r0 = static_cast<int>(r), c0 = static_cast<int>(c);
  const int r1 = std::min(r0 + 1, g.rows - 1), c1 = std::min(c0 + 1, g.cols - 1);
  const double fr = r - r0, fc = c - c0;
  const double top = g.at(r0, c0) * (1.0 - fc) + g.at(r0, c1) * fc;
  const double bot = g.at(r1, c0) * (1.0 - fc) + g.at(r1, c1) * fc;
  return top * (1.0 - fr) + bot * fr;
}

}  // namespace vibtrack
