#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vibtrack/grid.hpp"
#include "vibtrack/spectral.hpp"

namespace vibtrack {

// Logistic per-pixel classifier over B band magnitudes plus B local-context
// features (3x3 neighborhood mean of each band, replicate borders).
struct ModelParams {
  int bands = 0;                 // B; context feature count K equals B
  std::vector<double> weights;   // size 2*B
  double bias = 0.0;

  static ModelParams zeros(int bands);
  int dim() const { return bands * 2; }
};

struct ParamGrad {
  std::vector<double> weights;
  double bias = 0.0;
};

// Per-pixel feature vectors (band magnitudes followed by context means).
std::vector<double> build_features(const FeatureMap& map);

ProbabilityMap forward(const FeatureMap& features, const ModelParams& params);

// Gradient of sum_i upstream_i * pred_i w.r.t. the parameters.
ParamGrad backward(const FeatureMap& features, const ModelParams& params,
                   const GridD& upstream);

// Flat little-endian f64 array behind a 16-byte header (magic, version, B, K).
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);
void write_params(const ModelParams& params, std::ostream& os);
ModelParams read_params(std::istream& is);

}  // namespace vibtrack
