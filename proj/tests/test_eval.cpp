#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "vibtrack/errors.hpp"
#include "vibtrack/eval.hpp"

using namespace vibtrack;

namespace {

Detection det_at(double r, double c, double angle) {
  Detection d;
  d.tip_px = {r, c};
  d.angle_deg = angle;
  return d;
}

}  // namespace

TEST_CASE("tip error arithmetic") {
  CHECK(tip_error_mm({10, 20}, {10, 20}, {1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(tip_error_mm({13, 24}, {10, 20}, {1.0, 1.0}) == doctest::Approx(5.0));
  // Anisotropic spacing: 10 px of row offset at the axial spacing.
  CHECK(tip_error_mm({20, 5}, {10, 5}, {0.17578, 0.20039}) ==
        doctest::Approx(1.7578).epsilon(1e-6));
}

TEST_CASE("angle error wraps at 180 degrees") {
  CHECK(angle_error_deg(30.0, 30.0) == doctest::Approx(0.0));
  CHECK(angle_error_deg(89.0, -89.0) == doctest::Approx(2.0));
  CHECK(angle_error_deg(15.0, 30.0) == doctest::Approx(15.0));
}

TEST_CASE("success thresholds are strict") {
  const Spacing iso{1.0, 1.0};
  // 9.9 mm and 14.9 degrees: success.
  EvalRecord a = make_record(0, det_at(0.0, 9.9, 14.9), {0, 0}, 0.0, iso);
  CHECK(a.success);
  // 10.1 mm tip with a perfect angle: failure (conjunctive criteria).
  EvalRecord b = make_record(1, det_at(0.0, 10.1, 1.0), {0, 0}, 0.0, iso);
  CHECK_FALSE(b.success);
  // Exactly on the boundary: failure on either axis.
  EvalRecord c = make_record(2, det_at(0.0, 10.0, 0.0), {0, 0}, 0.0, iso);
  CHECK_FALSE(c.success);
  EvalRecord d = make_record(3, det_at(0.0, 0.0, 15.0), {0, 0}, 0.0, iso);
  CHECK_FALSE(d.success);
}

TEST_CASE("summary uses population statistics") {
  std::vector<EvalRecord> recs;
  EvalRecord a;
  a.frame_id = 0;
  a.tip_error_mm = 2.0;
  a.angle_error_deg = 1.0;
  a.success = true;
  EvalRecord b;
  b.frame_id = 1;
  b.tip_error_mm = 4.0;
  b.angle_error_deg = 3.0;
  b.success = true;
  recs.push_back(a);
  recs.push_back(b);
  const EvalSummary s = summarize(recs);
  CHECK(s.tip_mean == doctest::Approx(3.0));
  CHECK(s.tip_std == doctest::Approx(1.0));
  CHECK(s.angle_mean == doctest::Approx(2.0));
  CHECK(s.angle_std == doctest::Approx(1.0));
  CHECK(s.success_rate_pct == doctest::Approx(100.0));
  CHECK(s.sample_count == 2);
  CHECK(s.detected_count == 2);
}

TEST_CASE("missing detections count against the success rate only") {
  std::vector<EvalRecord> recs;
  EvalRecord a;
  a.frame_id = 0;
  a.tip_error_mm = 2.0;
  a.angle_error_deg = 1.0;
  a.success = true;
  recs.push_back(a);
  recs.push_back(make_missing_record(1));
  const EvalSummary s = summarize(recs);
  CHECK(s.tip_mean == doctest::Approx(2.0));  // mean over detected only
  CHECK(s.success_rate_pct == doctest::Approx(50.0));
  CHECK(s.sample_count == 2);
  CHECK(s.detected_count == 1);
}

TEST_CASE("empty record set throws") {
  std::vector<EvalRecord> recs;
  CHECK_THROWS_AS(summarize(recs), EmptyRecordSet);
}

TEST_CASE("summary CSV has the full column set") {
  std::vector<EvalRecord> recs = {make_missing_record(0)};
  const EvalSummary s = summarize(recs);
  const std::string csv = summary_csv(s);
  int commas = 0;
  for (char ch : csv)
    if (ch == ',') ++commas;
  CHECK(commas == 6);  // 7 fields
}
