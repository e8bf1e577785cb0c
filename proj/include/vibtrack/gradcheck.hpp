#pragma once

#include <cstdint>

namespace vibtrack {

// Central finite-difference verification of the analytic gradients: the
// objective gradients w.r.t. the prediction maps, and the model parameter
// gradients through forward().
struct GradCheckResult {
  double max_rel_err_pred = 0.0;
  double max_rel_err_params = 0.0;
  int pred_points = 0;
  int param_points = 0;
  int configs = 0;
};

GradCheckResult run_gradient_check(int trials, std::uint64_t seed = 42,
                                   double step = 1e-5);

}  // namespace vibtrack
