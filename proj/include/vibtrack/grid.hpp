#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vibtrack/errors.hpp"

namespace vibtrack {

// Dense row-major 2D grid. Row index grows downward (image convention).
template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int r, int c, T fill = T{})
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const T& at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Grid& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < rows && c >= 0 && c < cols;
  }
};

using GridD = Grid<double>;
using Mask = Grid<std::uint8_t>;
using ProbabilityMap = GridD;

inline void require_same_shape(const GridD& a, const GridD& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("grid shapes differ");
}

// mm per pixel, per axis. row = axial (depth), col = lateral.
struct Spacing {
  double row_mm = 1.0;
  double col_mm = 1.0;
};

struct PointD {
  double r = 0.0;
  double c = 0.0;
};

}  // namespace vibtrack
