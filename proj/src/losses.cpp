#include "vibtrack/losses.hpp"

#include <cmath>

#include "vibtrack/errors.hpp"

namespace vibtrack {

namespace {

void require_binary(const Mask& m) {
  for (auto v : m.data)
    if (v != 0 && v != 1) throw NonBinaryTarget("mask values must be 0 or 1");
}

void require_shape(const GridD& p, const Mask& m) {
  if (p.rows != m.rows || p.cols != m.cols)
    throw ShapeMismatch("prediction/target shapes differ");
}

double clampp(double p, double eps) {
  return p < eps ? eps : (p > 1.0 - eps ? 1.0 - eps : p);
}

GridD to_grid(const Mask& m) {
  GridD g(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i)
    g.data[i] = static_cast<double>(m.data[i]);
  return g;
}

}  // namespace

double focal_loss(const ProbabilityMap& pred, const Mask& target,
                  const LossConfig& cfg) {
  require_shape(pred, target);
  require_binary(target);
  const std::size_t n = pred.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clampp(pred.data[i], cfg.eps);
    if (target.data[i]) {
      sum += std::pow(1.0 - p, cfg.eta) * std::log(p);
    } else if (cfg.neg_branch == FocalNegBranch::AsPrinted) {
      sum += std::pow(1.0 - p, cfg.gamma) * std::pow(p, cfg.eta) *
             std::log(1.0 - p);
    } else {
      sum += std::pow(p, cfg.gamma) * std::log(1.0 - p);
    }
  }
  return -sum / static_cast<double>(n);
}

GridD focal_loss_gradient(const ProbabilityMap& pred, const Mask& target,
                          const LossConfig& cfg) {
  require_shape(pred, target);
  require_binary(target);
  const std::size_t n = pred.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  GridD grad(pred.rows, pred.cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = pred.data[i];
    if (raw <= cfg.eps || raw >= 1.0 - cfg.eps) continue;  // clamp plateau
    const double p = raw;
    double d;
    if (target.data[i]) {
      // d/dp [-(1-p)^eta * ln p]
      d = cfg.eta * std::pow(1.0 - p, cfg.eta - 1.0) * std::log(p) -
          std::pow(1.0 - p, cfg.eta) / p;
    } else if (cfg.neg_branch == FocalNegBranch::AsPrinted) {
      // d/dp [-(1-p)^gamma * p^eta * ln(1-p)]
      const double lg = std::log(1.0 - p);
      double inner = -std::pow(1.0 - p, cfg.gamma - 1.0) * std::pow(p, cfg.eta);
      if (cfg.gamma != 0.0)
        inner += -cfg.gamma * std::pow(1.0 - p, cfg.gamma - 1.0) *
                 std::pow(p, cfg.eta) * lg;
      if (cfg.eta != 0.0)
        inner += cfg.eta * std::pow(p, cfg.eta - 1.0) *
                 std::pow(1.0 - p, cfg.gamma) * lg;
      d = -inner;
    } else {
      double inner = -std::pow(p, cfg.gamma) / (1.0 - p);
      if (cfg.gamma != 0.0)
        inner += cfg.gamma * std::pow(p, cfg.gamma - 1.0) * std::log(1.0 - p);
      d = -inner;
    }
    grad.data[i] = d * inv_n;
  }
  return grad;
}

double bce(const GridD& pred, const GridD& target, double eps) {
  require_same_shape(pred, target);
  const std::size_t n = pred.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clampp(pred.data[i], eps);
    const double t = target.data[i];
    sum += t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(n);
}

GridD intersection_mask(const GridD& a, const GridD& b) {
  require_same_shape(a, b);
  GridD out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

GridD difference_mask(const GridD& a, const GridD& b) {
  require_same_shape(a, b);
  GridD out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i)
    out.data[i] = std::fabs(a.data[i] - b.data[i]);
  return out;
}

TotalLossParts total_loss_parts(const ProbabilityMap& pred_t,
                                const ProbabilityMap& pred_td,
                                const Mask& gt_t, const Mask& gt_td,
                                const LossConfig& cfg, bool diff_active) {
  require_shape(pred_t, gt_t);
  require_shape(pred_td, gt_td);
  require_same_shape(pred_t, pred_td);

  TotalLossParts parts;
  parts.focal_t = focal_loss(pred_t, gt_t, cfg);
  parts.focal_td = focal_loss(pred_td, gt_td, cfg);
  const GridD g_t = to_grid(gt_t), g_td = to_grid(gt_td);
  if (cfg.alpha != 0.0)
    parts.inter = bce(intersection_mask(pred_t, pred_td),
                      intersection_mask(g_t, g_td), cfg.eps);
  if (diff_active && cfg.beta != 0.0)
    parts.diff = bce(difference_mask(pred_t, pred_td),
                     difference_mask(g_t, g_td), cfg.eps);
  parts.total = parts.focal_t + parts.focal_td + cfg.alpha * parts.inter +
                (diff_active ? cfg.beta * parts.diff : 0.0);
  return parts;
}

double total_loss(const ProbabilityMap& pred_t, const ProbabilityMap& pred_td,
                  const Mask& gt_t, const Mask& gt_td, const LossConfig& cfg,
                  bool diff_active) {
  return total_loss_parts(pred_t, pred_td, gt_t, gt_td, cfg, diff_active).total;
}

std::pair<GridD, GridD> total_loss_gradient(const ProbabilityMap& pred_t,
                                            const ProbabilityMap& pred_td,
                                            const Mask& gt_t, const Mask& gt_td,
                                            const LossConfig& cfg,
                                            bool diff_active) {
  require_shape(pred_t, gt_t);
  require_shape(pred_td, gt_td);
  require_same_shape(pred_t, pred_td);

  GridD ga = focal_loss_gradient(pred_t, gt_t, cfg);
  GridD gb = focal_loss_gradient(pred_td, gt_td, cfg);

  const std::size_t n = pred_t.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = pred_t.data[i], b = pred_td.data[i];
    if (cfg.alpha != 0.0) {
      const double prod = a * b;
      if (prod > cfg.eps && prod < 1.0 - cfg.eps) {
        const double tgt = static_cast<double>(gt_t.data[i] & gt_td.data[i]);
        const double dbce = (-tgt / prod + (1.0 - tgt) / (1.0 - prod)) * inv_n;
        ga.data[i] += cfg.alpha * dbce * b;
        gb.data[i] += cfg.alpha * dbce * a;
      }
    }
    if (diff_active && cfg.beta != 0.0) {
      const double ad = std::fabs(a - b);
      if (ad > cfg.eps && ad < 1.0 - cfg.eps) {
        const double tgt =
            std::fabs(static_cast<double>(gt_t.data[i]) - gt_td.data[i]);
        const double dbce = (-tgt / ad + (1.0 - tgt) / (1.0 - ad)) * inv_n;
        const double sgn = a > b ? 1.0 : -1.0;
        ga.data[i] += cfg.beta * dbce * sgn;
        gb.data[i] -= cfg.beta * dbce * sgn;
      }
    }
  }
  return {std::move(ga), std::move(gb)};
}

}  // namespace vibtrack
