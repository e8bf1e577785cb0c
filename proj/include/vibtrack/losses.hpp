#pragma once

#include <utility>

#include "vibtrack/grid.hpp"

namespace vibtrack {

enum class FocalNegBranch {
  AsPrinted,  // (1-y)*(1-p)^gamma * p^eta * log(1-p)
  Canonical   // (1-y)*p^gamma * log(1-p)
};

struct LossConfig {
  double eta = 2.0;
  double gamma = 4.0;
  double alpha = 0.5;   // intersection weight
  double beta = 0.02;   // difference weight
  int delta = 5;        // frame offset between paired windows
  double eps = 1e-7;    // probability clamp
  FocalNegBranch neg_branch = FocalNegBranch::AsPrinted;
};

struct TotalLossParts {
  double focal_t = 0.0;
  double focal_td = 0.0;
  double inter = 0.0;
  double diff = 0.0;
  double total = 0.0;
};

double focal_loss(const ProbabilityMap& pred, const Mask& target,
                  const LossConfig& cfg);

// Gradient of focal_loss w.r.t. each prediction (zero where the clamp is
// active).
GridD focal_loss_gradient(const ProbabilityMap& pred, const Mask& target,
                          const LossConfig& cfg);

// Mean binary cross entropy; soft targets allowed. Predictions clamped to
// [eps, 1-eps], targets used as-is.
double bce(const GridD& pred, const GridD& target, double eps = 1e-7);

GridD intersection_mask(const GridD& a, const GridD& b);
GridD difference_mask(const GridD& a, const GridD& b);

double total_loss(const ProbabilityMap& pred_t, const ProbabilityMap& pred_td,
                  const Mask& gt_t, const Mask& gt_td, const LossConfig& cfg,
                  bool diff_active);

TotalLossParts total_loss_parts(const ProbabilityMap& pred_t,
                                const ProbabilityMap& pred_td,
                                const Mask& gt_t, const Mask& gt_td,
                                const LossConfig& cfg, bool diff_active);

// Analytic partials of total_loss w.r.t. pred_t and pred_td.
std::pair<GridD, GridD> total_loss_gradient(const ProbabilityMap& pred_t,
                                            const ProbabilityMap& pred_td,
                                            const Mask& gt_t, const Mask& gt_td,
                                            const LossConfig& cfg,
                                            bool diff_active);

}  // namespace vibtrack
