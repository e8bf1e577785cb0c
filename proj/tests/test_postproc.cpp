#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vibtrack/errors.hpp"
#include "vibtrack/postproc.hpp"

using namespace vibtrack;

namespace {

std::vector<PixelCoord> line_points(double angle_deg, double r0, double c0,
                                    int n, double spacing = 2.0) {
  const double rad = angle_deg * std::numbers::pi / 180.0;
  std::vector<PixelCoord> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({static_cast<int>(std::lround(r0 + i * spacing * std::sin(rad))),
                   static_cast<int>(std::lround(c0 + i * spacing * std::cos(rad)))});
  }
  return pts;
}

}  // namespace

TEST_CASE("binarize boundary is inclusive and monotone in the threshold") {
  ProbabilityMap m(3, 3, 0.5);
  const BinarizeResult all = binarize(m, 0.5);
  CHECK(all.positives.size() == 9);
  ProbabilityMap z(3, 3, 0.0);
  CHECK(binarize(z, 0.5).positives.empty());

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbabilityMap r(8, 8);
  for (auto& v : r.data) v = u(rng);
  const auto lo = binarize(r, 0.3).positives;
  const auto hi = binarize(r, 0.7).positives;
  for (const auto& p : hi)
    CHECK(std::find(lo.begin(), lo.end(), p) != lo.end());
}

TEST_CASE("TLS fit recovers an exact 30-degree line") {
  const auto pts = line_points(30.0, 10.0, 10.0, 50);
  const LineFit fit = fit_line_tls(pts);
  CHECK(fit.angle_deg == doctest::Approx(30.0).epsilon(1e-2));

  // With exactly collinear (unrounded) points the recovery is tight.
  std::vector<PixelCoord> exact;
  for (int i = 0; i < 50; ++i) exact.push_back({i, 2 * i});  // slope 1/2
  const LineFit f2 = fit_line_tls(exact);
  CHECK(f2.angle_deg ==
        doctest::Approx(std::atan2(1.0, 2.0) * 180.0 / std::numbers::pi)
            .epsilon(1e-6));
}

TEST_CASE("degenerate inputs throw") {
  std::vector<PixelCoord> one = {{3, 3}};
  CHECK_THROWS_AS(fit_line_tls(one), InsufficientPoints);
  std::vector<PixelCoord> same(10, PixelCoord{5, 5});
  CHECK_THROWS_AS(fit_line_tls(same), DegenerateInput);
  CHECK_THROWS_AS(ransac_line(one, 2.0, 100, 1), InsufficientPoints);
  CHECK_THROWS_AS(ransac_line(same, 2.0, 100, 1), DegenerateInput);
}

TEST_CASE("RANSAC is invariant to input point order") {
  auto pts = line_points(25.0, 5.0, 5.0, 60);
  pts.push_back({90, 3});
  pts.push_back({2, 95});
  const LineFit a = ransac_line(pts, 2.0, 300, 77);
  std::reverse(pts.begin(), pts.end());
  const LineFit b = ransac_line(pts, 2.0, 300, 77);
  CHECK(a.angle_deg == doctest::Approx(b.angle_deg).epsilon(1e-12));
  CHECK(a.inlier_count == b.inlier_count);
}

TEST_CASE("RANSAC recovers 15-degree lines against 20% outliers") {
  // 80 noisy inliers + 20 uniform outliers, 100 seeded runs; the oracle is
  // TLS on the true inlier set. Require <= 1 degree error in >= 95 runs.
  int good = 0;
  for (int run = 0; run < 100; ++run) {
    std::mt19937_64 rng(1000 + run);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    const double rad = 15.0 * std::numbers::pi / 180.0;
    std::vector<PixelCoord> pts;
    for (int i = 0; i < 80; ++i) {
      const double t = i * 2.0;
      pts.push_back(
          {static_cast<int>(std::lround(20.0 + t * std::sin(rad) + noise(rng))),
           static_cast<int>(std::lround(10.0 + t * std::cos(rad) + noise(rng)))});
    }
    for (int i = 0; i < 20; ++i)
      pts.push_back({static_cast<int>(u(rng)), static_cast<int>(u(rng))});
    const LineFit fit = ransac_line(pts, 2.0, 500, 42 + run);
    if (std::fabs(wrap_line_angle(fit.angle_deg - 15.0)) <= 1.0) ++good;
  }
  CHECK(good >= 95);
}

TEST_CASE("tip extraction projects onto the fitted line") {
  SUBCASE("single on-line positive is its own tip") {
    Mask m(120, 220, 0);
    m.at(50, 100) = 1;
    LineFit fit;
    fit.anchor = {50.0, 100.0};
    fit.dir = {std::sin(0.3), std::cos(0.3)};
    fit.angle_deg = 0.3 * 180.0 / std::numbers::pi;
    const Detection d = extract_tip(m, fit, {1.0, 1.0});
    CHECK(d.tip_px.r == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(d.tip_px.c == doctest::Approx(100.0).epsilon(1e-12));
  }
  SUBCASE("30-degree segment tip lands near its true endpoint") {
    // Points from (10,10) to (110,183): slope tan(30deg).
    Mask m(150, 220, 0);
    std::vector<PixelCoord> pts;
    const double rad = 30.0 * std::numbers::pi / 180.0;
    for (double t = 0.0; t <= 200.0; t += 1.0) {
      const int r = static_cast<int>(std::lround(10.0 + t * std::sin(rad)));
      const int c = static_cast<int>(std::lround(10.0 + t * std::cos(rad)));
      if (r > 110) break;
      m.at(r, c) = 1;
      pts.push_back({r, c});
    }
    const LineFit fit = ransac_line(pts, 2.0, 500, 3);
    const Detection d = extract_tip(m, fit, {1.0, 1.0});
    CHECK(d.tip_px.r == doctest::Approx(110.0).epsilon(0.01));
    CHECK(std::hypot(d.tip_px.r - 110.0, d.tip_px.c - 183.0) < 0.5);
    // Perpendicular residual of the projected tip is numerically zero.
    const double wr = d.tip_px.r - fit.anchor.r, wc = d.tip_px.c - fit.anchor.c;
    const double perp = wr * -fit.dir.c + wc * fit.dir.r;
    CHECK(std::fabs(perp) < 1e-9);
  }
  SUBCASE("empty mask throws") {
    Mask m(10, 10, 0);
    LineFit fit;
    fit.dir = {0.0, 1.0};
    CHECK_THROWS_AS(extract_tip(m, fit, {1.0, 1.0}), EmptyMask);
  }
}

TEST_CASE("angle wrap and flip equivariance") {
  CHECK(wrap_line_angle(90.5) == doctest::Approx(-89.5));
  CHECK(wrap_line_angle(-90.0) == doctest::Approx(90.0));
  CHECK(wrap_line_angle(30.0) == doctest::Approx(30.0));
  CHECK(wrap_line_angle(180.0 + 30.0) == doctest::Approx(30.0));

  // Mirroring the points about a vertical axis negates the fitted angle.
  const auto pts = line_points(20.0, 10.0, 10.0, 50);
  std::vector<PixelCoord> flipped;
  for (const auto& p : pts) flipped.push_back({p.r, 200 - p.c});
  const LineFit a = ransac_line(pts, 2.0, 300, 5);
  const LineFit b = ransac_line(flipped, 2.0, 300, 5);
  CHECK(a.angle_deg == doctest::Approx(-b.angle_deg).epsilon(1e-6));
}

TEST_CASE("detection CSV round-trip") {
  Detection d;
  d.frame_index = 42;
  d.tip_px = {110.25, 183.5};
  d.tip_x_mm = 36.77;
  d.tip_y_mm = 19.39;
  d.angle_deg = 29.97;
  d.inlier_ratio = 0.85;
  const auto parsed = parse_detection(format_detection(d));
  REQUIRE(parsed.has_value());
  CHECK(parsed->frame_index == 42);
  CHECK(parsed->tip_px.r == doctest::Approx(d.tip_px.r).epsilon(1e-9));
  CHECK(parsed->tip_px.c == doctest::Approx(d.tip_px.c).epsilon(1e-9));
  CHECK(parsed->angle_deg == doctest::Approx(d.angle_deg).epsilon(1e-9));
  CHECK(parsed->inlier_ratio == doctest::Approx(d.inlier_ratio).epsilon(1e-9));
  CHECK(!parse_detection("garbage line").has_value());
}
