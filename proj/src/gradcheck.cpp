#include "vibtrack/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vibtrack/losses.hpp"
#include "vibtrack/model.hpp"
#include "vibtrack/spectral.hpp"

namespace vibtrack {

namespace {

double rel_err(double analytic, double numeric) {
  return std::fabs(analytic - numeric) /
         std::max(std::fabs(analytic) + std::fabs(numeric), 1e-3);
}

}  // namespace

GradCheckResult run_gradient_check(int trials, std::uint64_t seed, double step) {
  GradCheckResult res;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uprob(0.05, 0.95);
  std::uniform_real_distribution<double> uweight(0.0, 1.0);
  std::uniform_int_distribution<int> ubit(0, 1);

  const int rows = 6, cols = 6;
  for (int trial = 0; trial < trials; ++trial) {
    LossConfig cfg;
    cfg.eta = 1 + (trial % 3);
    cfg.gamma = (trial % 2) ? 2 : 4;
    cfg.alpha = uweight(rng);
    cfg.beta = uweight(rng);
    const bool diff_active = true;
    ++res.configs;

    ProbabilityMap pa(rows, cols), pb(rows, cols);
    Mask ga(rows, cols), gb(rows, cols);
    for (std::size_t i = 0; i < pa.size(); ++i) {
      pa.data[i] = uprob(rng);
      // Keep the |a-b| kink and the product clamp away from the probe
      // points so central differences are valid.
      do {
        pb.data[i] = uprob(rng);
      } while (std::fabs(pa.data[i] - pb.data[i]) < 0.02);
      ga.data[i] = static_cast<std::uint8_t>(ubit(rng));
      gb.data[i] = static_cast<std::uint8_t>(ubit(rng));
    }

    const auto [grad_a, grad_b] =
        total_loss_gradient(pa, pb, ga, gb, cfg, diff_active);
    for (std::size_t i = 0; i < pa.size(); ++i) {
      for (int side = 0; side < 2; ++side) {
        ProbabilityMap& target = side == 0 ? pa : pb;
        const double saved = target.data[i];
        target.data[i] = saved + step;
        const double up = total_loss(pa, pb, ga, gb, cfg, diff_active);
        target.data[i] = saved - step;
        const double dn = total_loss(pa, pb, ga, gb, cfg, diff_active);
        target.data[i] = saved;
        const double fd = (up - dn) / (2.0 * step);
        const double an = side == 0 ? grad_a.data[i] : grad_b.data[i];
        res.max_rel_err_pred = std::max(res.max_rel_err_pred, rel_err(an, fd));
        ++res.pred_points;
      }
    }

    // Parameter gradients through the forward pass. Resample the second
    // feature map until no pixel pair sits near the |a-b| kink, where central
    // differences are invalid.
    const int bands = 2;
    FeatureMap fa(rows, cols, bands), fb(rows, cols, bands);
    std::uniform_real_distribution<double> ufeat(0.0, 2.0);
    for (auto& v : fa.data) v = ufeat(rng);
    ModelParams params = ModelParams::zeros(bands);
    std::uniform_real_distribution<double> uparam(-0.5, 0.5);
    for (auto& w : params.weights) w = uparam(rng);
    params.bias = uparam(rng);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (auto& v : fb.data) v = ufeat(rng);
      const ProbabilityMap a = forward(fa, params), b = forward(fb, params);
      double min_gap = 1.0;
      for (std::size_t i = 0; i < a.data.size(); ++i)
        min_gap = std::min(min_gap, std::fabs(a.data[i] - b.data[i]));
      if (min_gap >= 0.02) break;
    }

    auto objective = [&](const ModelParams& p) {
      return total_loss(forward(fa, p), forward(fb, p), ga, gb, cfg,
                        diff_active);
    };
    const ProbabilityMap oa = forward(fa, params), ob = forward(fb, params);
    const auto [la, lb] = total_loss_gradient(oa, ob, ga, gb, cfg, diff_active);
    const ParamGrad pga = backward(fa, params, la);
    const ParamGrad pgb = backward(fb, params, lb);

    const int dim = params.dim();
    for (int j = 0; j <= dim; ++j) {
      ModelParams p = params;
      double* slot = j < dim ? &p.weights[j] : &p.bias;
      const double saved = *slot;
      *slot = saved + step;
      const double up = objective(p);
      *slot = saved - step;
      const double dn = objective(p);
      const double fd = (up - dn) / (2.0 * step);
      const double an =
          j < dim ? pga.weights[j] + pgb.weights[j] : pga.bias + pgb.bias;
      res.max_rel_err_params = std::max(res.max_rel_err_params, rel_err(an, fd));
      ++res.param_points;
    }
  }
  return res;
}

}  // namespace vibtrack
