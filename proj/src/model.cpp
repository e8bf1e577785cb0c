#include "vibtrack/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "vibtrack/errors.hpp"

namespace vibtrack {

namespace {

constexpr char kMagic[4] = {'V', 'T', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_dim(const FeatureMap& f, const ModelParams& p) {
  if (f.bands != p.bands || static_cast<int>(p.weights.size()) != p.dim())
    throw DimensionMismatch("feature bands do not match model parameters");
}

}  // namespace

ModelParams ModelParams::zeros(int bands) {
  ModelParams p;
  p.bands = bands;
  p.weights.assign(static_cast<std::size_t>(bands) * 2, 0.0);
  p.bias = 0.0;
  return p;
}

std::vector<double> build_features(const FeatureMap& map) {
  const int rows = map.rows, cols = map.cols, nb = map.bands;
  const int dim = nb * 2;
  std::vector<double> feats(static_cast<std::size_t>(rows) * cols * dim);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double* out = &feats[(static_cast<std::size_t>(r) * cols + c) * dim];
      for (int b = 0; b < nb; ++b) out[b] = map.at(r, c, b);
      // 3x3 mean with replicated borders
      for (int b = 0; b < nb; ++b) {
        double s = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          const int rr = std::clamp(r + dr, 0, rows - 1);
          for (int dc = -1; dc <= 1; ++dc) {
            const int cc = std::clamp(c + dc, 0, cols - 1);
            s += map.at(rr, cc, b);
          }
        }
        out[nb + b] = s / 9.0;
      }
    }
  }
  return feats;
}

ProbabilityMap forward(const FeatureMap& features, const ModelParams& params) {
  require_dim(features, params);
  const auto feats = build_features(features);
  const int dim = params.dim();
  ProbabilityMap out(features.rows, features.cols);
  const std::size_t npix = out.size();
  for (std::size_t p = 0; p < npix; ++p) {
    const double* f = &feats[p * dim];
    double z = params.bias;
    for (int j = 0; j < dim; ++j) z += params.weights[j] * f[j];
    out.data[p] = sigmoid(z);
  }
  return out;
}

ParamGrad backward(const FeatureMap& features, const ModelParams& params,
                   const GridD& upstream) {
  require_dim(features, params);
  if (upstream.rows != features.rows || upstream.cols != features.cols)
    throw DimensionMismatch("upstream gradient shape differs from features");
  const auto feats = build_features(features);
  const int dim = params.dim();
  ParamGrad grad;
  grad.weights.assign(dim, 0.0);
  const std::size_t npix = upstream.size();
  for (std::size_t p = 0; p < npix; ++p) {
    const double* f = &feats[p * dim];
    double z = params.bias;
    for (int j = 0; j < dim; ++j) z += params.weights[j] * f[j];
    const double s = sigmoid(z);
    const double t = upstream.data[p] * s * (1.0 - s);
    grad.bias += t;
    for (int j = 0; j < dim; ++j) grad.weights[j] += t * f[j];
  }
  return grad;
}

void write_params(const ModelParams& params, std::ostream& os) {
  os.write(kMagic, 4);
  const std::uint32_t ver = kVersion;
  const std::uint32_t b = static_cast<std::uint32_t>(params.bands);
  const std::uint32_t k = b;  // context features mirror the bands
  os.write(reinterpret_cast<const char*>(&ver), 4);
  os.write(reinterpret_cast<const char*>(&b), 4);
  os.write(reinterpret_cast<const char*>(&k), 4);
  os.write(reinterpret_cast<const char*>(params.weights.data()),
           static_cast<std::streamsize>(params.weights.size() * 8));
  os.write(reinterpret_cast<const char*>(&params.bias), 8);
}

ModelParams read_params(std::istream& is) {
  char magic[4];
  std::uint32_t ver = 0, b = 0, k = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&ver), 4);
  is.read(reinterpret_cast<char*>(&b), 4);
  is.read(reinterpret_cast<char*>(&k), 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0 || ver != kVersion || k != b)
    throw DataError("bad model parameter header");
  ModelParams p;
  p.bands = static_cast<int>(b);
  p.weights.resize(static_cast<std::size_t>(b) * 2);
  is.read(reinterpret_cast<char*>(p.weights.data()),
          static_cast<std::streamsize>(p.weights.size() * 8));
  is.read(reinterpret_cast<char*>(&p.bias), 8);
  if (!is) throw DataError("truncated model parameter file");
  return p;
}

void save_params(const ModelParams& params, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  write_params(params, os);
}

ModelParams load_params(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  return read_params(is);
}

}  // namespace vibtrack
